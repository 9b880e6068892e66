from __future__ import annotations

import numbers
from enum import IntEnum

from .errors import DataError


class ClassLabel(IntEnum):
    """Diagnostic classes with stable integer codes used in serialized files."""

    NORMAL = 0
    DIABETIC_RETINOPATHY = 1
    DRUSEN = 2

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def parse(cls, value) -> "ClassLabel":
        if isinstance(value, ClassLabel):
            return value
        if isinstance(value, numbers.Integral) and not isinstance(value, bool):
            try:
                return cls(int(value))
            except ValueError:
                raise DataError(f"unknown class code {value}") from None
        for label, name in _DISPLAY.items():
            if value == name:
                return label
        raise DataError(f"unknown class label {value!r}")


_DISPLAY = {
    ClassLabel.NORMAL: "Normal",
    ClassLabel.DIABETIC_RETINOPATHY: "DiabeticRetinopathy",
    ClassLabel.DRUSEN: "Drusen",
}
