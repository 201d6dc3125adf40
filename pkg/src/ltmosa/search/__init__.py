from .config import ALGORITHMS, Budget, ConfigError, SearchConfig
from .core import Archive, EventLog, Individual
from .mio import run_mio
from .mosa import SearchResult, run_lt_mosa, run_mosa


def run_search(config: SearchConfig, sut, keep_trees: bool = False) -> SearchResult:
    """Run the algorithm named by ``config.algorithm`` against ``sut``."""
    if config.algorithm == "mio":
        return run_mio(config, sut)
    if config.algorithm == "mosa":
        return run_mosa(config, sut, keep_trees)
    return run_lt_mosa(config, sut, keep_trees)


__all__ = [
    "ALGORITHMS", "Archive", "Budget", "ConfigError", "EventLog", "Individual", "SearchConfig",
    "SearchResult", "run_lt_mosa", "run_mio", "run_mosa", "run_search",
]
