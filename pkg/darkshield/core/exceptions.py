"""
Custom exceptions for DarkShield
"""

from typing import Any, Dict, List, Optional, Tuple


class DarkShieldException(Exception):
    """Base exception for DarkShield"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used by the CLI error channel"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class ConfigurationError(DarkShieldException):
    """Exception raised for an unusable configuration value"""
    pass


class ModelException(DarkShieldException):
    """Exception raised for invalid model input"""
    pass


class DomainError(ModelException):
    """Exception raised when an argument is outside the operation's domain"""
    pass


class GeometryError(ModelException):
    """Exception raised for an impossible sphere/substrate geometry"""
    pass


class PreconditionError(ModelException):
    """Exception raised when an operation is called outside its regime"""
    pass


class DegenerateCouplingError(ModelException):
    """Exception raised when the collective Rabi energy vanishes"""
    pass


class BasisTooLargeError(ModelException):
    """Exception raised when a multiphoton basis exceeds the size cap"""
    pass


class IntegrationException(DarkShieldException):
    """Exception raised during time integration"""
    pass


class IntegrationError(IntegrationException):
    """Exception raised when the adaptive integrator fails"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=diagnostics)
        self.diagnostics = diagnostics or {}


class StabilityError(IntegrationException):
    """Exception raised when a stochastic step is too coarse"""
    pass


class ScenarioException(DarkShieldException):
    """Exception raised while loading or running scenarios"""
    pass


class ScenarioValidationError(ScenarioException):
    """Exception raised when a scenario file has invalid fields"""

    def __init__(self, message: str, errors: List[Tuple[str, str]]):
        super().__init__(
            message,
            details=[{"field": path, "message": msg} for path, msg in errors],
        )
        self.errors = errors


class ScenarioRunError(ScenarioException):
    """Exception raised when a scenario fails during execution"""
    pass


class RegimeWarning(UserWarning):
    """Warning issued when an approximation is used outside its regime"""
    pass


class EigenbasisWarning(RegimeWarning):
    """Warning issued when eigen-propagation falls back to integration"""
    pass
