"""Case bank errors."""

from typing import Optional


class CaseBankError(Exception):
    """Base exception for case bank operations."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class BankFormatError(CaseBankError):
    """Raised when a bank file holds a malformed record."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"{message}{where}", error_code="BANK_FORMAT")


class DuplicateCaseError(CaseBankError):
    """Raised when a case id already exists in the bank."""

    def __init__(self, case_id: str):
        self.case_id = case_id
        super().__init__(f"Duplicate case id: {case_id}", error_code="DUPLICATE_CASE")


class BankDimensionError(CaseBankError):
    """Raised when a case embedding disagrees with the bank dimension."""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Case embedding has dimension {actual}, bank uses {expected}",
            error_code="BANK_DIMENSION",
        )


class BankPersistError(CaseBankError):
    """Raised when writing a bank to disk fails; on-disk state is unchanged."""

    def __init__(self, message: str, original_error: Optional[Exception] = None):
        self.original_error = original_error
        super().__init__(message, error_code="BANK_PERSIST")
