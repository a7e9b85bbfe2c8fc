"""Lexing, parsing, validation and serialization of NNEF item descriptions."""

from .lexer import Token, tokenize
from .parser import parse, parse_item_program, parse_program
from .program import (
    Instruction,
    ItemProgram,
    ItemRef,
    NnefProgram,
    SyncRef,
    VarRef,
)
from .serialize import format_instruction, serialize
from .ssa import Violation, validate_item_set, validate_ssa
from .weights import (
    WeightStore,
    decode_tensor,
    encode_tensor,
    load_weights,
    read_tensor,
    save_weights,
    write_tensor,
)

__all__ = [
    "Instruction",
    "ItemProgram",
    "ItemRef",
    "NnefProgram",
    "SyncRef",
    "Token",
    "VarRef",
    "Violation",
    "WeightStore",
    "decode_tensor",
    "encode_tensor",
    "format_instruction",
    "load_weights",
    "parse",
    "parse_item_program",
    "parse_program",
    "read_tensor",
    "save_weights",
    "serialize",
    "tokenize",
    "validate_item_set",
    "validate_ssa",
    "write_tensor",
]
