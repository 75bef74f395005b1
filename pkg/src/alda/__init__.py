"""A rule-integrated language.

Datalog-style rule sets live alongside sets, functions, imperative
updates, and objects.  Predicates are set-valued variables; queries are
`infer` calls; derived predicates of rule sets whose base predicates are
object fields or globals are maintained automatically at every update.
"""

from .errors import AldaError, CompileError, RuntimeFault
from .facts import FactStore, load_fact_file
from .parser import parse_program
from .pretty import pretty_print
from .values import Addr, structural_equal

__all__ = [
    "AldaError",
    "Addr",
    "CompileError",
    "FactStore",
    "RuntimeFault",
    "load_fact_file",
    "parse_program",
    "pretty_print",
    "structural_equal",
]

__version__ = "0.1.0"
