from modecast.exceptions import AlignmentError, NoOverlapError
from modecast.utils import _validate_coordinates

METEOROLOGICAL_VARIABLES = ('rain_mm', 'max_temp_c', 'min_temp_c', 'humidity_pct')
MOBILITY_VARIABLES = ('rr', 'gp', 'pa', 'ts', 'wo', 're')
CASES_VARIABLE = 'new_cases'


class CityRecord(object):
    def __init__(self, city_id, latitude, longitude, cases, meteorological=None, mobility=None):
        """Create CityRecord

        Args:
            city_id (str): Unique city identifier.
            latitude (float): Latitude in decimal degrees, in [-90, 90].
            longitude (float): Longitude in decimal degrees, in [-180, 180].
            cases (TimeSeries): Daily new confirmed cases.
            meteorological (dict[str -> TimeSeries], optional): Series keyed by a name from
                ``METEOROLOGICAL_VARIABLES``.
            mobility (dict[str -> TimeSeries], optional): Series keyed by a name from
                ``MOBILITY_VARIABLES``.
        """
        self.city_id = city_id
        self.latitude, self.longitude = _validate_coordinates(latitude, longitude)
        self.cases = cases
        self.meteorological = dict(meteorological or {})
        self.mobility = dict(mobility or {})
        _validate_variable_names(self.meteorological, METEOROLOGICAL_VARIABLES, 'meteorological')
        _validate_variable_names(self.mobility, MOBILITY_VARIABLES, 'mobility')
        for name, series in self.exogenous.items():
            if series.start_day != cases.start_day or len(series) != len(cases):
                raise AlignmentError(f"Series '{name}' of city '{city_id}' does not share the cases date range")

    def __eq__(self, other):
        return (isinstance(other, CityRecord) and
                self.city_id == other.city_id and
                self.latitude == other.latitude and
                self.longitude == other.longitude and
                self.cases == other.cases and
                self.meteorological == other.meteorological and
                self.mobility == other.mobility)

    def __repr__(self):
        return (f"<CityRecord '{self.city_id}' ({self.latitude}, {self.longitude}), "
                f"{len(self.cases)} days, {len(self.exogenous)} exogenous series>")

    @property
    def exogenous(self):
        """All meteorological and mobility series, meteorological first, in vocabulary order."""
        ordered = {}
        for name in METEOROLOGICAL_VARIABLES:
            if name in self.meteorological:
                ordered[name] = self.meteorological[name]
        for name in MOBILITY_VARIABLES:
            if name in self.mobility:
                ordered[name] = self.mobility[name]
        return ordered

    def series(self, variable):
        """Returns the series named ``variable``, including ``new_cases``."""
        if variable == CASES_VARIABLE:
            return self.cases
        exogenous = self.exogenous
        if variable not in exogenous:
            raise KeyError(f"City '{self.city_id}' has no variable '{variable}'")
        return exogenous[variable]

    def replace(self, variable, series):
        """Returns a copy of the record with one series replaced."""
        cases = series if variable == CASES_VARIABLE else self.cases
        meteorological = dict(self.meteorological)
        mobility = dict(self.mobility)
        if variable in METEOROLOGICAL_VARIABLES:
            meteorological[variable] = series
        elif variable in MOBILITY_VARIABLES:
            mobility[variable] = series
        elif variable != CASES_VARIABLE:
            raise KeyError(f"Unknown variable '{variable}'")
        return CityRecord(self.city_id, self.latitude, self.longitude, cases, meteorological, mobility)


class PanelDataset(object):
    def __init__(self, cities, metadata=None):
        """Create PanelDataset

        Args:
            cities (list[CityRecord]): Records with unique identifiers. Order is preserved and
                defines the node order used by graph operations.
            metadata (dict, optional): Extra information about the panel, such as clamp counts.
        """
        ids = [city.city_id for city in cities]
        duplicates = sorted({city_id for city_id in ids if ids.count(city_id) > 1})
        if duplicates:
            raise ValueError(f"Duplicate city identifier(s): {', '.join(duplicates)}")
        self.cities = list(cities)
        self.metadata = metadata or {}

    def __len__(self):
        return len(self.cities)

    def __iter__(self):
        return iter(self.cities)

    def __getitem__(self, city_id):
        for city in self.cities:
            if city.city_id == city_id:
                return city
        raise KeyError(f"City '{city_id}' not found in panel")

    def __eq__(self, other):
        return isinstance(other, PanelDataset) and self.cities == other.cities

    def __repr__(self):
        return f"<PanelDataset ({len(self)} cities: {', '.join(self.city_ids)})>"

    @property
    def city_ids(self):
        return [city.city_id for city in self.cities]

    @property
    def date_range(self):
        """(first day offset, last day offset) spanned by the case series of all cities."""
        return (min(city.cases.start_day for city in self.cities),
                max(city.cases.end_day for city in self.cities))

    def overlap(self):
        """(first day offset, last day offset) on which every city has a case value."""
        first_day = max(city.cases.start_day for city in self.cities)
        last_day = min(city.cases.end_day for city in self.cities)
        if first_day > last_day:
            raise NoOverlapError('Cities of the panel share no common dates')
        return first_day, last_day

    def coordinates(self):
        """List of (city_id, latitude, longitude) in panel order."""
        return [(city.city_id, city.latitude, city.longitude) for city in self.cities]

    def replace_cities(self, cities, metadata=None):
        """Returns a new panel with the given records, keeping this panel's metadata unless overridden."""
        return PanelDataset(cities, metadata={**self.metadata, **(metadata or {})})


def _validate_variable_names(series_by_name, vocabulary, kind):
    unknown = sorted(set(series_by_name) - set(vocabulary))
    if unknown:
        raise KeyError(f"Unknown {kind} variable(s): {', '.join(unknown)}")
