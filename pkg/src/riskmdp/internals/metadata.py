#!/usr/bin/env python3

from importlib.metadata import PackageNotFoundError, metadata

try:
    __meta_data = metadata("riskmdp")
except PackageNotFoundError:
    # running from a source checkout without an installed distribution
    __meta_data = {
        "Name": "riskmdp",
        "Version": "0.0.0+source",
        "License": "MIT",
        "Author": "riskmdp developers",
        "Maintainer": "riskmdp developers",
    }

__package__ = __meta_data["Name"]
__version__ = __meta_data["Version"]
__license__ = __meta_data["License"]
__credits__ = list(dict.fromkeys([
    __meta_data["Author"],
    __meta_data["Maintainer"],
]))
