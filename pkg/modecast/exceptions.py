class NegativeCountsWarning(UserWarning):
    def get_warning_message(self, city_id, num_days):
        return f"City '{city_id}' has {num_days} day(s) with negative observed counts"


class ClampedValuesWarning(UserWarning):
    def get_warning_message(self, num_values):
        return f'{num_values} normalized case count(s) were below zero and have been clamped to zero'


class ConvergenceWarning(UserWarning):
    def get_warning_message(self, order, message):
        return f'Polishing step for {order} did not converge ({message}); keeping the simplex solution'


class UndefinedCorrelationWarning(UserWarning):
    def get_warning_message(self, variable_name):
        return f"Spearman correlation is undefined for '{variable_name}' (zero variance); variable left unselected"


class TooShortError(ValueError):
    pass


class InvalidOrderError(ValueError):
    pass


class InvalidSeedError(ValueError):
    pass


class NoOverlapError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class DegenerateEnvelopeError(ValueError):
    pass


class EmptyInputError(ValueError):
    pass


class DayRangeError(ValueError):
    pass


class InvalidLagError(ValueError):
    pass


class InvalidDegreesOfFreedomError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


class UndefinedCriterionError(ValueError):
    pass


class DuplicateNodeError(ValueError):
    pass


class GraphTooSmallError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


class DateOrderError(ValueError):
    pass


class NonConvergenceError(RuntimeError):
    def __init__(self, order, diagnostics):
        self.order = order
        self.diagnostics = diagnostics
        super().__init__(f"Estimation of {order} did not converge: "
                         f"best objective {diagnostics.get('objective')} after "
                         f"{diagnostics.get('iterations')} iterations")


class NearUnitRootError(ValueError):
    def __init__(self, order, modulus):
        self.order = order
        self.modulus = modulus
        super().__init__(f"{order} has a polynomial root of modulus {modulus:.4f}, too close to the unit circle")


class SelectionError(RuntimeError):
    def __init__(self, failures):
        self.failures = failures
        lines = [f'  {order}: {error}' for order, error in failures.items()]
        super().__init__("Every candidate order failed:\n" + "\n".join(lines))


class LevelFitError(RuntimeError):
    def __init__(self, level, cause):
        self.level = level
        self.cause = cause
        super().__init__(f"Fitting level {level} failed: {cause}")


class ParseError(ValueError):
    def __init__(self, path, line, reason):
        self.path = path
        self.line = line
        super().__init__(f"{path}, line {line}: {reason}")


class UnknownCityError(KeyError):
    def __init__(self, city_id, path):
        self.city_id = city_id
        return super().__init__(f"City '{city_id}' in {path} is not present in the cases file")


class ImputationError(ValueError):
    def __init__(self, gap, reason):
        self.gap = gap
        super().__init__(f"Cannot impute gap {gap}: {reason}")
