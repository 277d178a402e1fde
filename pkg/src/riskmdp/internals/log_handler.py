#!/usr/bin/env python3

import csv
import json
import sys
from enum import Enum, unique
from logging import FileHandler, Formatter, Handler, StreamHandler, getLogger
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional, Self, TextIO, TypedDict, Union, Unpack

from rich.logging import RichHandler

from .formatters import CsvFormatter, JsonFormatter

type LogTarget = Union[str, Path, Literal["console", "rich_console"]]
type LogHistory = Union[List[str], List[List[str]], List[Dict[str, Any]]]


@unique
class LogLevel(Enum):
    """
    ### LogLevel
    Mirrors the stdlib levels. What the solvers log on each of them:

    - `DEBUG`: per-iteration progress (`LogHandler.iteration`)
    - `INFO`: verdicts of finished iterations (`LogHandler.verdict`)
    - `WARNING`: inconclusive runs and expensive inner grids
    - `ERROR`: divergence and invalid models
    - `CRITICAL`: unhandled exceptions in the command line interface
    """
    NOTSET = 0
    DEBUG = 10
    INFO = 20
    WARNING = 30
    ERROR = 40
    CRITICAL = 50


class LogArgs(TypedDict):
    exc_info: Optional[BaseException]
    stack_info: bool
    stacklevel: int
    extra: Optional[Mapping[str, object]]


PLAIN_SUFFIXES = (".log", ".dat", ".txt")
STRUCTURED_FORMATTERS = {".csv": CsvFormatter, ".json": JsonFormatter}

# JSON logs hold one object per line, so the file as a whole is not a JSON document
HISTORY_READERS: Dict[str, Callable[[TextIO], LogHistory]] = {
    ".csv": lambda lines: list(csv.reader(lines)),
    ".json": lambda lines: [json.loads(line) for line in lines if line.strip()],
} | {suffix: lambda lines: lines.readlines() for suffix in PLAIN_SUFFIXES}


class LogHandler:
    """
    LogHandler
    ----------
    Thin wrapper around a stdlib logger that solvers share. Handlers are keyed
    by file name, or by `"console"` and `"rich_console"` for stdout.

    Logging without any handler attached raises a `TypeError`; pass
    `hide=True` to drop a record instead, which is what solvers do unless
    logging was enabled.
    """
    default_layout = "%(asctime)s [%(levelname)s] %(name)s@%(lineno)d - %(message)s"
    default_structured_layout = {
        "timestamp": "asctime",
        "level": "levelname",
        "file": "pathname",
        "line": "lineno",
        "method": "method",
        "iteration": "iteration",
        "residual": "residual",
        "message": "message"
    }

    def __init__(
            self: Self,
            level: Optional[LogLevel]=None,
            path: Optional[Union[str, Path]]=None,
            encoding: str="utf-8",
            name: str=__name__
        ) -> None:
        self.level = level or LogLevel.NOTSET
        self.path = Path(path) if path is not None else None
        self.encoding = encoding
        self.handlers: Dict[str, Handler] = {}

        self.__logger = getLogger(name)
        self.__logger.setLevel(self.level.value)

    def set_base_path(self: Self, path: Union[str, Path]) -> Self:
        self.path = Path(path)
        return self

    def with_level(self: Self, level: LogLevel) -> Self:
        self.level = level
        self.__logger.setLevel(level.value)
        return self

    def add_handler(self: Self, name: LogTarget="console", layout: Optional[Union[str, Dict[str, str]]]=None) -> Self:
        """
        Attach a handler. File logs are created below `self.path`, and their
        suffix selects the layout: plain text for `.log`, `.dat` and `.txt`,
        one row or object per record for `.csv` and `.json`. Structured layouts
        map output keys to record attributes, plain ones are `%`-style strings.
        """
        match name:
            case "rich_console":
                self.__attach("rich_console", RichHandler(rich_tracebacks=True))
            case "console":
                handler = StreamHandler(sys.stdout)
                handler.setFormatter(Formatter(layout or self.default_layout))
                self.__attach("console", handler)
            case _:
                log_file = self.path.joinpath(name)
                handler = FileHandler(log_file, encoding=self.encoding)
                handler.setFormatter(self.__file_formatter(log_file.suffix, layout))
                self.__attach(log_file.name, handler)

        return self

    def get_log_history(self: Self, name: Union[str, Path]) -> LogHistory:
        """
        Read a log file back: lines for text logs, rows for CSV and dictionaries
        for JSON.
        """
        file = self.path.joinpath(name)
        reader = HISTORY_READERS.get(file.suffix)

        if reader is None: raise NotImplementedError(f"unsupported log file format ({file.suffix=})")
        if not file.exists(): raise FileNotFoundError(file)

        for handler in self.handlers.values(): handler.flush()

        with open(file, mode="r", encoding=self.encoding) as file_handler:
            return reader(file_handler)

    def unlink(self: Self, name: Union[str, Path], missing_ok: bool=False) -> None:
        """
        Detach the handler of a log file below `self.path` and delete the file.
        """
        file = self.path.joinpath(name)

        if file.name not in self.handlers or not file.exists():
            raise FileNotFoundError(f"{file} is not a log file of this logger")

        # on Windows an open handler keeps the file locked
        self.__detach(file.name)
        file.unlink(missing_ok)

    def shutdown(self: Self) -> None:
        """
        Flush, close and detach every handler; call at application exit.
        """
        for key in reversed(list(self.handlers)):
            self.__detach(key)

    #region log utilities

    def log(self: Self, level: LogLevel, message: str, *args: object, hide: bool=False, **kwargs: Unpack[LogArgs]) -> None:
        """
        Log `message % args` with severity `level`.
        """
        if hide: return
        if not self.handlers: raise TypeError("Logger configured incorrectly: no handler attached to this object")

        # report the caller of the public method, not this module
        kwargs["stacklevel"] = kwargs.get("stacklevel", 1) + 2
        self.__logger.log(level.value, message, *args, **kwargs)

    def debug(self: Self, message: str, *args: object, hide: bool=False, **kwargs: Unpack[LogArgs]) -> None:
        self.log(LogLevel.DEBUG, message, *args, hide=hide, **self.__offset(kwargs))

    def info(self: Self, message: str, *args: object, hide: bool=False, **kwargs: Unpack[LogArgs]) -> None:
        self.log(LogLevel.INFO, message, *args, hide=hide, **self.__offset(kwargs))

    def warning(self: Self, message: str, *args: object, hide: bool=False, **kwargs: Unpack[LogArgs]) -> None:
        self.log(LogLevel.WARNING, message, *args, hide=hide, **self.__offset(kwargs))

    def error(self: Self, message: str, *args: object, hide: bool=False, **kwargs: Unpack[LogArgs]) -> None:
        self.log(LogLevel.ERROR, message, *args, hide=hide, **self.__offset(kwargs))

    def critical(self: Self, message: str, *args: object, hide: bool=False, **kwargs: Unpack[LogArgs]) -> None:
        self.log(LogLevel.CRITICAL, message, *args, hide=hide, **self.__offset(kwargs))

    def iteration(self: Self, method: str, iteration: int, residual: float, hide: bool=False) -> None:
        """
        Record one progress step of `method` on DEBUG level. `method`,
        `iteration` and `residual` become record fields, so structured logs
        get them as separate columns.
        """
        self.log(
            LogLevel.DEBUG,
            "%s: iteration %d, residual %.3e",
            method, iteration, residual,
            hide=hide,
            stacklevel=2,
            extra={"method": method, "iteration": iteration, "residual": residual}
        )

    def verdict(self: Self, method: str, status: str, iteration: int, residual: float, hide: bool=False) -> None:
        """
        Record how `method` ended on INFO level, with the same fields as `iteration`.
        """
        self.log(
            LogLevel.INFO,
            "%s %s after %d iterations",
            method, status, iteration,
            hide=hide,
            stacklevel=2,
            extra={"method": method, "iteration": iteration, "residual": residual}
        )

    #endregion

    #region handler utilities

    def __file_formatter(self: Self, suffix: str, layout: Optional[Union[str, Dict[str, str]]]) -> Formatter:
        if suffix in PLAIN_SUFFIXES:
            return Formatter(layout or self.default_layout)

        if suffix in STRUCTURED_FORMATTERS:
            return STRUCTURED_FORMATTERS[suffix](fmt_dict=layout or self.default_structured_layout)

        raise NotImplementedError(f"unsupported log target ({suffix=})")

    def __attach(self: Self, key: str, handler: Handler) -> None:
        self.handlers[key] = handler
        self.__logger.addHandler(handler)

    def __detach(self: Self, key: str) -> None:
        handler = self.handlers.pop(key)
        self.__logger.removeHandler(handler)

        try:
            handler.flush()
            handler.close()
        except (OSError, ValueError):
            # already closed by the interpreter at exit
            pass

    @staticmethod
    def __offset(kwargs: Dict[str, Any]) -> Dict[str, Any]:
        # one more frame between the caller and `log`
        kwargs["stacklevel"] = kwargs.get("stacklevel", 1) + 1
        return kwargs

    #endregion
