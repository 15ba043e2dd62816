# This file marks the memsys directory as a Python package
