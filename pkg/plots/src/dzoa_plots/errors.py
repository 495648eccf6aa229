"""Error taxonomy for the plotting tool."""


class SchemaError(ValueError):
    """An input file, option, or output target violates the expected contract.

    Everything this package refuses — wrong CSV marker, missing columns,
    mixed groups, empty inputs, unsupported image formats — raises this one
    class, so callers and the CLI have a single failure surface.
    """
