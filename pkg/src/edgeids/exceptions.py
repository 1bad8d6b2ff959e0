"""Exception types shared across the package."""


class DataError(ValueError):
    """Raised when input data is malformed or unusable."""


class ConfigError(ValueError):
    """Raised for invalid experiment configuration.

    ``field`` names the offending configuration key when one is known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class AggregationHalt(RuntimeError):
    """Raised when no client carries positive aggregation mass."""


class FederationError(RuntimeError):
    """Wraps a failure inside a federated round with round/client context."""

    def __init__(self, message, round_index=None, client_id=None):
        self.round_index = round_index
        self.client_id = client_id
        where = []
        if round_index is not None:
            where.append(f"round {round_index}")
        if client_id is not None:
            where.append(f"client {client_id}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
