"""Exception types raised across the package."""


class TGLSDVError(ValueError):
    """Base class for all package errors."""


class BalancedPanelError(TGLSDVError):
    def __init__(self, country, year, variable):
        self.country = country
        self.year = year
        self.variable = variable
        super().__init__(f"missing value for ({country}, {year}, {variable})")


class YearGapError(TGLSDVError):
    pass


class DuplicateRowError(TGLSDVError):
    def __init__(self, country, year):
        self.country = country
        self.year = year
        super().__init__(f"duplicate row for ({country}, {year})")


class UnknownCountryError(TGLSDVError):
    pass


class DegenerateGroupError(TGLSDVError):
    pass


class SeriesTooShortError(TGLSDVError):
    pass


class NonFiniteError(TGLSDVError):
    pass


class InsufficientSupportError(TGLSDVError):
    pass


class DomainError(TGLSDVError):
    def __init__(self, country, year, variable, value):
        self.country = country
        self.year = year
        self.variable = variable
        self.value = value
        super().__init__(
            f"log of nonpositive value {value!r} at ({country}, {year}, {variable})"
        )


class DegenerateRangeError(TGLSDVError):
    pass


class CollinearityError(TGLSDVError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("design is rank deficient; dependent columns: "
                         + ", ".join(self.columns))


class InsufficientDofError(TGLSDVError):
    pass


class UnstableDGPError(TGLSDVError):
    pass


class VariantMismatchError(TGLSDVError):
    pass
