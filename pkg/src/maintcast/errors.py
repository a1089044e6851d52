"""Exception hierarchy.

Three broad families, mirroring the CLI exit codes: usage problems (exit 1),
data errors raised while reading or validating inputs (exit 2), and internal
invariant failures that indicate a bug rather than bad input (exit 3).
"""


class MaintcastError(Exception):
    """Base class for all package errors."""


class UsageError(MaintcastError):
    """Bad invocation: unknown subcommand, invalid config values, missing paths."""


class DataError(MaintcastError):
    """Input data violates the documented file formats or domain invariants."""


class InvariantError(MaintcastError):
    """An internal consistency check failed; indicates a bug, not bad input."""


# --- ingest ---------------------------------------------------------------

class MalformedRecord(DataError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        super().__init__(f"malformed record at line {line_no}" + (f": {detail}" if detail else ""))


class InvalidDate(DataError):
    def __init__(self, line_no: int, value: str = ""):
        self.line_no = line_no
        super().__init__(f"invalid date at line {line_no}" + (f": {value!r}" if value else ""))


class DuplicateRepo(DataError):
    def __init__(self, repo_id: str):
        self.repo_id = repo_id
        super().__init__(f"duplicate repository id {repo_id!r}")


class InconsistentDates(DataError):
    def __init__(self, repo_id: str):
        self.repo_id = repo_id
        super().__init__(f"repository {repo_id!r} archived before it was created")


class UnknownRepo(DataError):
    def __init__(self, repo_id: str):
        self.repo_id = repo_id
        super().__init__(f"event references repository {repo_id!r} with no metadata entry")


# --- fetch client ---------------------------------------------------------

class FetchError(DataError):
    """Base class for remote export failures."""


class AuthFailure(FetchError):
    def __init__(self):
        super().__init__("endpoint rejected the supplied token")


class RateLimited(FetchError):
    def __init__(self, retry_after: float):
        self.retry_after = retry_after
        super().__init__(f"rate limited, retry after {retry_after}s")


class RepoNotFound(FetchError):
    def __init__(self, repo_url: str):
        self.repo_url = repo_url
        super().__init__(f"repository not found: {repo_url}")


class RequestBudgetExceeded(FetchError):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"request budget of {budget} exhausted before pagination finished")


# --- scorecard / analytics ------------------------------------------------

class MixedRepos(DataError):
    def __init__(self, repo_ids):
        self.repo_ids = sorted(repo_ids)
        super().__init__(f"events span multiple repositories: {self.repo_ids}")


class MissingAuthorField(DataError):
    def __init__(self, repo_id: str):
        self.repo_id = repo_id
        super().__init__(f"events for {repo_id!r} carry no author identities; stability analytics unavailable")


# --- graph ----------------------------------------------------------------

class EmptySelection(DataError):
    def __init__(self):
        super().__init__("no library in the snapshot has a repository link")


# --- targets / features ---------------------------------------------------

class TooShort(DataError):
    def __init__(self, detail: str):
        super().__init__(detail)


class EmptySampleSet(DataError):
    def __init__(self, detail: str = "no repository yields a complete window/target pair in range"):
        super().__init__(detail)


# --- models ---------------------------------------------------------------

class EmptyTrainingSet(DataError):
    def __init__(self):
        super().__init__("cannot train on an empty sample set")


class ShapeMismatch(DataError):
    def __init__(self, expected, got):
        super().__init__(f"sample shape {got} does not match training shape {expected}")


class KindMismatch(DataError):
    def __init__(self, expected: str, got: str):
        super().__init__(f"operation requires a {expected} model, got {got}")


class SingularSystem(DataError):
    def __init__(self):
        super().__init__("normal equations are singular; increase the ridge penalty")


# --- evaluation -----------------------------------------------------------

class LengthMismatch(DataError):
    def __init__(self, n_pred: int, n_true: int):
        super().__init__(f"prediction/truth length mismatch: {n_pred} vs {n_true}")


class UnknownLabel(DataError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"label {label!r} outside the task label space")


class InsufficientHistory(DataError):
    def __init__(self, cell):
        self.cell = cell
        super().__init__(f"not enough aggregated blocks for cell {cell}")


class LeakageError(InvariantError):
    def __init__(self, detail: str):
        super().__init__(f"leakage guard tripped: {detail}")


# --- synth ----------------------------------------------------------------

class InvalidSpec(DataError):
    def __init__(self, detail: str):
        super().__init__(detail)
