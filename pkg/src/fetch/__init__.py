# This file marks the fetch directory as a Python package
