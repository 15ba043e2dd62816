# This file marks the pipeline directory as a Python package
