#!/usr/bin/env python3
"""
DarkShield - dark-state shielding of qubit ensembles in lossy nanocavities
Setup script
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

setup(
    name="darkshield",
    version="0.1.0",
    author="Tiziano Angeli",
    author_email="info@darkshield.org",
    description="Dissipative dynamics and dark-state shielding of qubit ensembles in lossy nanocavities",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/yourusername/darkshield",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Operating System :: OS Independent",
        "Environment :: Console",
    ],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.11.0",
        "pyyaml>=6.0.1",
        "python-dateutil>=2.8.2",
        "psutil>=5.9.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "pytest-cov>=4.1.0",
            "hypothesis>=6.80.0",
            "black>=23.0.0",
            "flake8>=6.0.0",
            "mypy>=1.5.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "darkshield=darkshield.main:cli",
        ],
    },
    include_package_data=True,
    package_data={
        "darkshield": [
            "scenarios/presets/*.scenario",
        ],
    },
    zip_safe=False,
)
