import os
from dataclasses import dataclass
from typing import Union

from errors import CapTooLargeError

FGL_CHOICES = ('additive', 'universal')
QUADRATIC_CHOICES = ('xf', 'xxt')
READING_CHOICES = ('whole', 'literal')
OUTPUT_CHOICES = ('text', 'json')

INT_FIELDS = ('cap', 'maxweight', 'MAX_CAP')


@dataclass
class SessionConfig:
    # Truncation; environment values stay strings until validate()
    cap: Union[int, str] = 8
    maxweight: Union[int, str] = 4
    MAX_CAP: Union[int, str] = 24  # memory budget for a single session

    # Structure choices
    fgl: str = 'universal'
    quadratic: str = 'xf'
    substitution_reading: str = 'whole'

    # Output
    output: str = 'text'
    LOG_LEVEL: str = 'WARNING'

    def validate(self) -> 'SessionConfig':
        for name in INT_FIELDS:
            value = getattr(self, name)
            try:
                setattr(self, name, int(value))
            except (TypeError, ValueError):
                raise ValueError(f"{name} must be an integer, got {value!r}") from None
        if self.cap < 2:
            raise ValueError(f"cap must be at least 2, got {self.cap}")
        if self.maxweight < 1:
            raise ValueError(f"maxweight must be at least 1, got {self.maxweight}")
        if self.cap > self.MAX_CAP:
            raise CapTooLargeError(f"cap {self.cap} exceeds the memory budget {self.MAX_CAP}")
        for value, choices in ((self.fgl, FGL_CHOICES),
                               (self.quadratic, QUADRATIC_CHOICES),
                               (self.substitution_reading, READING_CHOICES),
                               (self.output, OUTPUT_CHOICES)):
            if value not in choices:
                raise ValueError(f"{value!r} is not one of {choices}")
        return self

    @classmethod
    def from_env(cls) -> 'SessionConfig':
        return cls(
            cap=os.getenv('NISHIDA_CAP', cls.cap),
            maxweight=os.getenv('NISHIDA_MAXWEIGHT', cls.maxweight),
            MAX_CAP=os.getenv('NISHIDA_MAX_CAP', cls.MAX_CAP),
            fgl=os.getenv('NISHIDA_FGL', cls.fgl),
            quadratic=os.getenv('NISHIDA_QUADRATIC', cls.quadratic),
            substitution_reading=os.getenv('NISHIDA_READING', cls.substitution_reading),
            output=os.getenv('NISHIDA_OUTPUT', cls.output),
            LOG_LEVEL=os.getenv('NISHIDA_LOG_LEVEL', cls.LOG_LEVEL),
        )

config = SessionConfig.from_env()
