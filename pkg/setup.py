"""Setup script for decohere."""

from setuptools import setup, find_packages
from pathlib import Path

# Read README file
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

DEV_REQUIREMENTS = [
    "pytest>=7.0.0",
    "pytest-asyncio>=0.21.0",
    "pytest-cov>=4.0.0",
    "black>=23.0.0",
    "flake8>=6.0.0",
    "mypy>=1.0.0",
]

# Runtime requirements: everything in requirements.txt that is not a dev tool
requirements_file = Path(__file__).parent / "requirements.txt"
requirements = []
if requirements_file.exists():
    dev_names = {req.split(">=")[0] for req in DEV_REQUIREMENTS}
    with open(requirements_file, 'r') as f:
        requirements = [
            line.strip() for line in f.readlines()
            if line.strip() and not line.startswith('#') and line.split(">=")[0].strip() not in dev_names
        ]

setup(
    name="decohere",
    version="0.1.0",
    description="Stereo channel decorrelation with shaped comb-allpass filtering and masked noise",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Multimedia :: Sound/Audio :: Analysis",
        "Topic :: Scientific/Engineering",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={
        "dev": DEV_REQUIREMENTS,
    },
    entry_points={
        "console_scripts": [
            "decohere=decohere.cli:main",
        ],
    },
)
