"""Feedback infinite-time Turing machines: a symbolic interpreter."""

from .asm import ProgramSource, parse_program, print_program
from .ordinal import (
    OMEGA, ONE, ZERO, Ordinal, OrdinalCode, decode_ordinal, encode_ordinal, format_ordinal,
    omega_times, ord_add, ord_cmp, ord_sub, parse_ordinal, w_pow,
)
from .program import OracleCall, Program, Snapshot
from .tape import BLANK, TapeRep, format_tape, parse_tape, tape_read, tape_shift_equal, tape_write
from .verdict import Budgets, Verdict

__version__ = "0.1.0"
