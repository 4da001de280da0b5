"""Exception hierarchy shared by every houseprice module.

Each exception carries a stable ``code`` so the command line can report
failures as a single machine-parsable line.
"""


class HousePriceError(Exception):
    code = "HOUSEPRICE_ERROR"


class LoadError(HousePriceError, OSError):
    code = "LOAD_ERROR"


class SchemaError(HousePriceError, ValueError):
    code = "SCHEMA_ERROR"


class ListingParseError(HousePriceError, ValueError):
    code = "PARSE_ERROR"


class DatasetError(HousePriceError, ValueError):
    code = "DATASET_ERROR"


class ParameterError(HousePriceError, ValueError):
    code = "PARAMETER_ERROR"


class ModelLoadError(HousePriceError, ValueError):
    code = "MODEL_LOAD_ERROR"


class EnumerationError(HousePriceError, ValueError):
    code = "ENUMERATION_ERROR"


class ConfigError(HousePriceError, ValueError):
    code = "CONFIG_ERROR"
