# This file marks the harness directory as a Python package
