#!/usr/bin/env python3

from configparser import ConfigParser
from pathlib import Path
from types import TracebackType
from typing import Any, Dict, List, Optional, Self, Type, Union

from ..internals.utils import convert

type Settings = Dict[str, Dict[str, Optional[Any]]]


class ConfigHandler:
    """
    ConfigHandler
    -------------
    INI-backed solver configuration. Values are stored as strings and decoded
    back into Python literals on access, so `1e-09` reads as a `float` and
    `100000` as an `int`. Options missing from the file resolve to `defaults`.

    ```python
    >>> with ConfigHandler("riskmdp.ini") as config:
    ...     config.add_section("solver", settings={"tol": 1e-6})

    >>> ConfigHandler("riskmdp.ini").section("solver")
    {'tol': 1e-06, 'max_iter': 100000, 'blowup_factor': 1000000000000.0}
    ```
    """
    defaults: Settings = {
        "client": {
            "enable_logging": False,
            "log_level": 20,
            "verbose": True,
            "log_file": "riskmdp.log",
        },
        "solver": {
            "tol": 1e-9,
            "max_iter": 100_000,
            "blowup_factor": 1e12,
        },
        "transience": {
            "tol": 1e-10,
            "max_iter": 100_000,
            "blowup_factor": 1e12,
        },
        "randomized": {
            "inner_grid": 101,
            "inner_refinements": 3,
            "refine_factor": 22,
        },
    }

    def __init__(self: Self, path: Optional[Union[str, Path]]=None, encoding: str="utf-8") -> None:
        self.path = Path(path) if path is not None else None
        self.encoding = encoding
        self.__parser = ConfigParser()

    def __enter__(self: Self) -> Self:
        self.read()
        return self

    def __exit__(
            self: Self,
            type: Optional[Type[BaseException]],
            value: Optional[BaseException],
            traceback: Optional[TracebackType]
        ) -> None:
        # leave the file untouched if the block failed half-way
        if type is None: self.save()

    def __str__(self: Self) -> str:
        return str(self.json)

    @classmethod
    def create_default(cls: Type[Self], path: Union[str, Path]) -> Self:
        """
        Write every section of `defaults` to `path`, replacing the file.
        """
        config = cls(path)

        for section, settings in cls.defaults.items():
            config.add_section(section, settings=settings)

        config.save()
        return config

    #region Methods

    def read(self: Self) -> None:
        if self.path is not None and self.path.exists():
            self.__parser.read(self.path, encoding=self.encoding)

    def save(self: Self) -> None:
        with open(self.path, mode="w", encoding=self.encoding) as file_handler:
            self.__parser.write(file_handler)

    def add_section(self: Self, section: str, settings: Optional[Dict[str, Any]]=None) -> None:
        """
        Create `section`, or replace it when `settings` are given.
        """
        self.__parser[section] = {option: str(value) for option, value in (settings or {}).items()}

    def remove_section(self: Self, section: str) -> bool:
        return self.__parser.remove_section(section)

    def get_sections(self: Self) -> List[str]:
        return self.__parser.sections()

    def get_options(self: Self, section: str) -> List[str]:
        """
        Options stored in the file for `section`, without the built-in defaults.
        """
        return self.__parser.options(section) if self.__parser.has_section(section) else []

    def get_option(self: Self, section: str, option: str, default: Optional[Any]=None) -> Optional[Any]:
        """
        The stored value of `option`, else `default`, else the built-in default.
        """
        if self.__parser.has_option(section, option):
            return convert(self.__parser.get(section, option))

        return default if default is not None else self.defaults.get(section, {}).get(option)

    def set_option(self: Self, section: str, option: str, value: Optional[Any]) -> None:
        if not self.__parser.has_section(section): self.__parser.add_section(section)
        self.__parser.set(section, option, str(value))

    def remove_option(self: Self, section: str, option: str) -> bool:
        return self.__parser.has_section(section) and self.__parser.remove_option(section, option)

    def section(self: Self, section: str) -> Dict[str, Any]:
        """
        Every option of `section`: the built-in defaults overlaid with the
        stored values.
        """
        options = list(self.defaults.get(section, {})) + [o for o in self.get_options(section) if o not in self.defaults.get(section, {})]
        return {option: self.get_option(section, option) for option in options}

    def validate(self: Self) -> List[str]:
        """
        Describe every solver setting that is out of range; an empty list
        means the configuration is usable.
        """
        problems = []

        for name in ("solver", "transience"):
            settings = self.section(name)
            if not settings["tol"] > 0: problems.append(f"[{name}] tol must be positive, got {settings['tol']}")
            if not settings["max_iter"] >= 1: problems.append(f"[{name}] max_iter must be at least 1, got {settings['max_iter']}")
            if not settings["blowup_factor"] > 1: problems.append(f"[{name}] blowup_factor must exceed 1, got {settings['blowup_factor']}")

        randomized = self.section("randomized")
        if not randomized["inner_grid"] >= 2: problems.append(f"[randomized] inner_grid must be at least 2, got {randomized['inner_grid']}")
        if not randomized["inner_refinements"] >= 0: problems.append(f"[randomized] inner_refinements must be nonnegative, got {randomized['inner_refinements']}")
        if not randomized["refine_factor"] >= 2: problems.append(f"[randomized] refine_factor must be at least 2, got {randomized['refine_factor']}")

        return problems

    #endregion

    #region Properties

    @property
    def json(self: Self) -> Settings:
        """
        The stored sections as a dictionary, excluding `[DEFAULT]`.
        """
        return {section: {option: convert(value) for option, value in self.__parser[section].items()} for section in self.get_sections()}

    #endregion
