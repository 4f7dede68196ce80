class RepairError(Exception):
    """Base class for errors raised by this package."""


class AlphabetError(RepairError, ValueError):
    pass


class CapacityError(RepairError, ValueError):
    pass


class PositionError(RepairError, IndexError):
    pass


class ContractError(RepairError):
    """A queue or table operation was called outside its precondition."""


class DecodeError(RepairError, ValueError):
    pass


class ArchiveError(DecodeError):
    pass
