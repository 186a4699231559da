"""Exceptions raised by fgnarx"""


class FgnArxError(Exception):
    """Base class for all domain errors raised by fgnarx"""
    pass


class NoiseModelError(FgnArxError, ValueError):
    """Exception raised when a noise model parameter is out of range"""
    pass


class DegenerateCovarianceError(FgnArxError):
    """Exception raised when a covariance is numerically singular at some size"""

    def __init__(self, message: str, n: int = None):
        super().__init__(message)
        self.n = n


class EmbeddingError(FgnArxError):
    """Exception raised when the circulant embedding cannot be used for sampling"""
    pass


class DimensionError(FgnArxError, ValueError):
    """Exception raised for sequence length mismatches"""
    pass


class NotIdentifiableError(FgnArxError):
    """Exception raised when the observed information vanishes"""
    pass


class InadmissibleError(FgnArxError):
    """Exception raised when an argument lies outside its admissible range"""
    pass


class ExperimentError(FgnArxError):
    """Exception raised for invalid experiments or too many failed replications"""
    pass


class FormatError(FgnArxError):
    """Exception raised when a CSV or JSON file cannot be read or written"""
    pass
