"""Exception hierarchy shared across the package."""


class HexError(Exception):
    """Base class for all errors raised by hexeval."""


class InputError(HexError):
    """Problems with the program text (lexing, parsing, validation)."""


class LexError(InputError):
    def __init__(self, message, line, col):
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.line = line
        self.col = col


class ParseError(InputError):
    def __init__(self, message, line, col):
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.line = line
        self.col = col


class SafetyError(InputError):
    def __init__(self, rule_text, variables):
        super().__init__(
            "unsafe rule `%s`: variable%s %s not bound by a positive body literal"
            % (rule_text, "s" if len(variables) != 1 else "", ", ".join(variables))
        )
        self.rule_text = rule_text
        self.variables = tuple(variables)


class PluginError(HexError):
    """Problems with plugin registration or declarations."""


class DuplicatePluginError(PluginError):
    pass


class UnknownPluginError(PluginError):
    pass


class EvaluationError(PluginError):
    """An oracle or enumerator failed or violated its contract."""


class MinimizationError(HexError):
    """The nogood handed to a minimizer is not validator-valid."""


class GroundingError(HexError):
    pass


class InventionBudgetError(GroundingError):
    def __init__(self, plugin, budget):
        super().__init__(
            "value invention budget of %d new constants exceeded while "
            "enumerating outputs of &%s" % (budget, plugin)
        )
        self.plugin = plugin
        self.budget = budget
