"""
Setup configuration for climdelta
"""

from setuptools import setup, find_packages

setup(
    name="climdelta",
    version="1.0.0",
    description="Return-value and mean changes from climate-model ensembles via Bayesian regression",
    author="climdelta contributors",
    python_requires=">=3.10",
    packages=find_packages(exclude=["tests", "tests.*", "docs", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "pandas>=2.0",
        "openpyxl>=3.1",
        "pydantic>=2.5",
        "pydantic-settings>=2.1",
        "python-dotenv>=1.0",
        "humanize>=4.0",
        "tabulate>=0.9",
        "tenacity>=8.2",
    ],
    entry_points={
        "console_scripts": [
            "climdelta=cli.commands:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Atmospheric Science",
    ],
)
