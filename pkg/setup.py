#!/usr/bin/env python3

from typing import List, Optional

from setuptools import find_packages, setup

#region helper functions

def read_file(path: str, split: Optional[bool]=False) -> str | List[str]:
    with open(path, mode='r', encoding="utf-8") as file_handler:
        return file_handler.readlines() if split else file_handler.read()

#endregion

print("processing setup function")

setup(
    name="riskmdp",
    version="0.1.0",
    license="MIT",
    author="riskmdp developers",
    maintainer="riskmdp developers",
    description="Risk-averse total-cost solvers for transient Markov decision processes",
    long_description=read_file("README.md"),
    long_description_content_type="text/markdown",
    python_requires=">=3.12",
    install_requires=read_file("requirements/release.txt", split=True),
    extras_require={
        "dev": read_file("requirements/development.txt", split=True)[1:]
    },
    package_dir={
        "": "src",
    },
    packages=find_packages(where="src"),
    include_package_data=True,
    entry_points={
        "console_scripts": [
            "riskmdp=riskmdp.__main__:main"
        ]
    },
    classifiers=[
        "Programming Language :: Python :: 3.12",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Software Development :: Libraries",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    keywords="markov decision process risk measures avar semideviation dynamic programming"
)

print("setup is complete")
