"""Exception types shared by all modules."""


class ConezetaError(Exception):
    """Base class for library errors."""


class ShapeError(ConezetaError, ValueError):
    pass


class RankError(ConezetaError, ValueError):
    pass


class DomainError(ConezetaError, ValueError):
    pass


class PreconditionError(ConezetaError, ValueError):
    pass


class PoleError(ConezetaError, ZeroDivisionError):
    pass


class SchemaError(ConezetaError, ValueError):
    pass
