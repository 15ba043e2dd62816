from setuptools import setup, find_packages

setup(
    name="rvfetch_sim",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24",
        "pyyaml==6.0.1",
        "python-dotenv==1.0.0",
        "pydantic>=2.0",
        "prometheus-client==0.16.0",
        "jinja2==3.1.2",
        "psutil==5.9.0",
        "tabulate>=0.9.0",
    ],
    extras_require={
        "test": ["pytest==7.3.1", "pytest-mock>=3.6.1", "pytest-cov>=2.12.0"],
    },
    entry_points={
        "console_scripts": ["rvsim=src.harness.cli:main"],
    },
    python_requires=">=3.8",
)
