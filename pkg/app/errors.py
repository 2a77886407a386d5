from __future__ import annotations


class BenchError(Exception):
    """Базовая ошибка пакета."""


class ConfigError(BenchError):
    pass


class CorpusLoadError(BenchError):
    def __init__(self, message: str, missing: list[str] | None = None):
        super().__init__(message)
        self.missing = list(missing or [])


class CorpusIOError(BenchError, OSError):
    pass


class SchemaError(BenchError):
    def __init__(self, message: str, available: list[str] | None = None):
        super().__init__(message)
        self.available = list(available or [])


class SplitError(BenchError):
    pass


class VocabularyError(BenchError):
    pass


class TrainingError(BenchError):
    pass


class ContractError(BenchError, ValueError):
    pass


class UndefinedMetricError(BenchError):
    pass


class ReportError(BenchError, OSError):
    pass
