"""Case bank package: insight and agent-experience case stores."""

from .exceptions import (
    BankDimensionError,
    BankFormatError,
    BankPersistError,
    CaseBankError,
    DuplicateCaseError,
)
from .models import Case, CaseKind, Modality
from .retain import make_case_id, retain
from .store import BANK_FILE, CaseBank, add_case, load, read_cases, save

__all__ = [
    "Case",
    "CaseKind",
    "Modality",
    "CaseBank",
    "BANK_FILE",
    "add_case",
    "load",
    "save",
    "read_cases",
    "retain",
    "make_case_id",
    "CaseBankError",
    "BankFormatError",
    "BankDimensionError",
    "BankPersistError",
    "DuplicateCaseError",
]
