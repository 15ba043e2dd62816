# This file marks the refmodel directory as a Python package
