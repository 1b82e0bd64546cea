"""Exception hierarchy shared by the services and the command layer.

Every error carries a human message, a ``details`` dict that ends up verbatim in the
CLI's JSON diagnostic, and the process exit code the CLI should use.
"""


class EprLabError(Exception):
    exit_code = 2
    message = "An unexpected error occurred."

    def __init__(self, message: str = None, details: dict = None):
        super().__init__(message)
        if message: self.message = message
        self.details = details or {}

    def __str__(self):
        return self.message


# --- density / distribution validation ---
class ValidationFailure(EprLabError):
    message = "Operator is not a valid density matrix."

class NotHermitian(ValidationFailure):
    message = "Operator is not Hermitian."

class TraceNotOne(ValidationFailure):
    message = "Operator does not have unit trace."

class NotPositiveSemidefinite(ValidationFailure):
    message = "Operator is not positive semidefinite."

    @property
    def min_eigenvalue(self) -> float:
        return self.details.get("min_eigenvalue")

class NegativeProbability(ValidationFailure):
    message = "Joint distribution has a negative entry beyond round-off."


# --- shapes and arguments ---
class DimensionMismatch(EprLabError):
    message = "Operand dimensions do not match."

class IndexOutOfRange(EprLabError):
    message = "Outcome index is out of range."

class OutOfRange(EprLabError):
    message = "Parameter is outside its supported range."

class NotUnitary(EprLabError):
    message = "Matrix is not unitary."

class NotUnitVector(EprLabError):
    message = "Direction is not a unit vector."

class NotBijection(EprLabError):
    message = "Outcome map is not a bijection."

class InvalidTolerance(EprLabError):
    message = "Tolerance must lie strictly between 0 and 1/d."

class InvalidParameters(EprLabError):
    message = "Invalid parameters."


# --- input files ---
class InputFormatError(EprLabError):
    message = "Input could not be parsed."
