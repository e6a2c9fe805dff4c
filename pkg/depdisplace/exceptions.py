def _restore(cls, state):
    error = cls.__new__(cls)
    error.__dict__.update(state)
    Exception.__init__(error, state["msg"])
    return error


class DepdisplaceError(Exception):
    """Base class of depdisplace errors; picklable across worker processes"""

    def __reduce__(self):
        return _restore, (self.__class__, dict(self.__dict__))


class ConlluParseError(DepdisplaceError):
    """CoNLL-U syntax error with the offending line number"""

    def __init__(self, line_number, reason, source="<stream>"):
        self.line_number = line_number
        self.reason = reason
        self.source = source
        self.msg = "{} line {}: CoNLL-U Parse Error: {}".format(
            source, line_number, reason
        )
        super().__init__(self.msg)


class MalformedTreeError(DepdisplaceError):
    """Gold heads of a sentence do not form a tree rooted at 0"""

    def __init__(self, sentence_id, reason):
        self.sentence_id = sentence_id
        self.reason = reason
        self.msg = "Sentence {} Malformed Tree: {}".format(sentence_id, reason)
        super().__init__(self.msg)


class IllegalTransitionError(DepdisplaceError):
    """Transition applied while one of its preconditions does not hold"""

    def __init__(self, system, transition, reason):
        self.system = system
        self.transition = transition
        self.reason = reason
        self.msg = "System {} Illegal Transition {}: {}".format(
            system, transition, reason
        )
        super().__init__(self.msg)


class EmptyDistributionError(DepdisplaceError):
    """Displacement distribution without any support"""

    def __init__(self, reason):
        self.reason = reason
        self.msg = "Empty Distribution: {}".format(reason)
        super().__init__(self.msg)


class EnumerationCapacityError(DepdisplaceError):
    """Sentence length too large for exact enumeration"""

    def __init__(self, system, n, limit):
        self.system = system
        self.n = n
        self.limit = limit
        self.msg = "System {} Enumeration Capacity Error: n={} exceeds {}".format(
            system, n, limit
        )
        super().__init__(self.msg)


class UndefinedCorrelationError(DepdisplaceError):
    """Correlation requested on a constant series"""

    def __init__(self, reason):
        self.reason = reason
        self.msg = "Undefined Correlation: {}".format(reason)
        super().__init__(self.msg)


class ModelFormatError(DepdisplaceError):
    """Model file cannot be decoded"""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        self.msg = "Model {} Format Error: {}".format(path, reason)
        super().__init__(self.msg)


class SystemMismatchError(DepdisplaceError):
    """Model trained for one transition system used with another"""

    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        self.msg = "System Mismatch: model is for {}, got {}".format(found, expected)
        super().__init__(self.msg)


class ManifestError(DepdisplaceError):
    """Run manifest failed validation"""

    def __init__(self, reason):
        self.reason = reason
        self.msg = "Manifest Error: {}".format(reason)
        super().__init__(self.msg)


class EmptyTreebankError(DepdisplaceError):
    """A treebank split file holds no usable sentence"""

    def __init__(self, name, split, path):
        self.name = name
        self.split = split
        self.path = path
        self.msg = "Treebank {} Empty: {} split {} holds no valid sentence".format(
            name, split, path
        )
        super().__init__(self.msg)
