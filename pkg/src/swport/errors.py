"""Exception hierarchy.

Every error the library raises derives from :class:`SwportError`, so the CLI
can map each class to a one-line diagnostic and a non-zero exit status.
"""


class SwportError(Exception):
    exit_code = 1


class InputError(SwportError, ValueError):
    exit_code = 2


class EmptySequence(InputError):
    pass


class AlphabetMismatch(InputError):
    pass


class MatrixTooLarge(SwportError):
    exit_code = 3


class EmptyBatch(InputError):
    pass


class NoWorkers(InputError):
    pass


class NoQueries(InputError):
    pass


class NoTargets(InputError):
    pass


class UnknownWorker(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NonPositiveTime(InputError):
    pass


class ZeroPeak(InputError):
    pass


class MissingRecord(InputError):
    pass


class NoRecords(InputError):
    pass


class MalformedHeader(InputError):
    pass


class EmptyRecord(InputError):
    pass


class RaggedMatrix(InputError):
    pass


class UnknownSymbolDuplicate(InputError):
    pass


class UnknownDevice(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
