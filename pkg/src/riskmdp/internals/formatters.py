#!/usr/bin/env python3

import json
from logging import Formatter, LogRecord
from typing import Any, Dict, Optional, Self, override

# record attributes that solvers attach through `extra=`
SOLVER_FIELDS = ("method", "iteration", "residual")


class StructuredFormatter(Formatter):
    """
    StructuredFormatter
    -------------------
    Base class of the formatters that write one machine-readable record per
    line. `fmt_dict` maps output keys to `LogRecord` attributes; solver fields
    are optional since only iteration records carry them.
    """
    def __init__(
            self: Self,
            fmt_dict: Optional[Dict[str, str]]=None,
            time_format: str="%Y-%m-%dT%H:%M:%S",
            msec_format: str="%s.%03dZ"
        ) -> None:
        super().__init__()
        self.fmt_dict = fmt_dict if fmt_dict is not None else {"timestamp": "asctime", "level": "levelname", "message": "message"}
        self.default_time_format = time_format
        self.default_msec_format = msec_format

    @override
    def usesTime(self: Self) -> bool:
        return "asctime" in self.fmt_dict.values()

    def fields(self: Self, record: LogRecord) -> Dict[str, Any]:
        """
        Resolve `fmt_dict` against `record`; absent solver fields map to `None`.
        """
        record.message = record.getMessage()
        if self.usesTime(): record.asctime = self.formatTime(record, self.datefmt)

        return {
            key: record.__dict__.get(attribute) if attribute in SOLVER_FIELDS else record.__dict__[attribute]
            for key, attribute in self.fmt_dict.items()
        }

    def trailer(self: Self, record: LogRecord) -> Dict[str, str]:
        """
        Exception and stack information of `record`, if any.
        """
        extras = {}

        if record.exc_info and not record.exc_text:
            record.exc_text = self.formatException(record.exc_info)

        if record.exc_text: extras["exc_info"] = record.exc_text
        if record.stack_info: extras["stack_info"] = self.formatStack(record.stack_info)
        return extras


class JsonFormatter(StructuredFormatter):
    """
    One JSON object per line. Solver fields missing from a record are omitted.
    """
    @override
    def format(self: Self, record: LogRecord) -> str:
        fields = {key: value for key, value in self.fields(record).items() if value is not None or self.fmt_dict[key] not in SOLVER_FIELDS}
        return json.dumps(fields | self.trailer(record), default=str)


class CsvFormatter(StructuredFormatter):
    """
    One CSV row per record with the message quoted. Columns keep their
    position, so missing solver fields become empty cells.
    """
    def __init__(self: Self, sep: str=",", **kwargs) -> None:
        super().__init__(**kwargs)
        self.sep = sep
        self.header = list(self.fmt_dict.keys())

    @override
    def format(self: Self, record: LogRecord) -> str:
        cells = [
            f"\"{value}\"" if key == "message" else ("" if value is None else str(value))
            for key, value in self.fields(record).items()
        ]

        return "\n".join([self.sep.join(cells), *self.trailer(record).values()])
