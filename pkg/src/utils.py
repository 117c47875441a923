# Shared plumbing: logging, settings from .env, the error hierarchy, factorial tables,
# exact-number serialization and an order-preserving parallel map

import os
import logging
from dataclasses import dataclass
from fractions import Fraction
from concurrent.futures import ProcessPoolExecutor
from dotenv import load_dotenv

# Read .env once at import so every module sees the same environment
load_dotenv()

# No ceiling may go above this, whatever the environment says
HARD_N_LIMIT = 80


# Configure logger with file and console output
def setup_logger(name: str, log_file: str = None) -> logging.Logger:
    """
    Configure logger with file and console output

    Args:
        name: Logger name (usually the component, like 'CharacterEngine')
        log_file: Optional path to log file (e.g., 'logs/symchar.log')

    Returns:
        Configured logger instance

    Example:
        logger = setup_logger('AuditPipeline', 'logs/audit.log')
        logger.info('Suite started')
        logger.error('Integrality check failed')
    """

    # Create logger
    logger = logging.getLogger(name) # Creates or retrieves logger
    logger.setLevel(logging.DEBUG)

    # Same name asked twice -> reuse handlers instead of printing every line twice
    if getattr(logger, '_symchar_configured', False):
        if log_file:
            _attach_file_handler(logger, log_file)
        return logger

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Console handler goes to stderr so stdout only carries records
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO) # Only INFO and above shared to console
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    logger.propagate = False
    logger._symchar_configured = True

    if log_file:
        _attach_file_handler(logger, log_file)

    return logger


def _attach_file_handler(logger: logging.Logger, log_file: str):
    # File gets everything including DEBUG
    target = os.path.abspath(log_file)
    for handler in logger.handlers:
        if isinstance(handler, logging.FileHandler) and handler.baseFilename == target:
            return

    log_dir = os.path.dirname(target)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    file_handler = logging.FileHandler(target)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))
    logger.addHandler(file_handler)


def attach_log_file(log_file: str):
    """Send every component logger created so far to log_file as well."""
    for name in list(logging.root.manager.loggerDict):
        logger = logging.getLogger(name)
        if getattr(logger, '_symchar_configured', False):
            _attach_file_handler(logger, log_file)


def set_console_level(level: int):
    """Raise or lower the console threshold of every component logger (used by --quiet)."""
    for name in list(logging.root.manager.loggerDict):
        logger = logging.getLogger(name)
        if getattr(logger, '_symchar_configured', False):
            for handler in logger.handlers:
                if type(handler) is logging.StreamHandler:
                    handler.setLevel(level)


# Error hierarchy - the CLI turns exit_code into the process status

class SymCharError(Exception):
    exit_code = 1


class UsageError(SymCharError):
    exit_code = 2


class SizeMismatchError(UsageError):
    pass


class PreconditionError(UsageError):
    pass


class DomainError(UsageError):
    pass


class PresentationSyntaxError(UsageError):
    pass


class ResourceLimitError(SymCharError):
    exit_code = 3


class NonConvergenceError(ResourceLimitError):
    pass


class IntegrityError(SymCharError):
    """A value that must be a (non-negative) integer is not - engine bug."""
    exit_code = 4


# Settings

@dataclass(frozen=True)
class Settings:
    cache_dir: str = '.symchar_cache'
    n_ceiling: int = 45
    brute_ceiling: int = 5
    torsion_brute_ceiling: int = 7
    log_file: str = None
    seed: int = 20240607
    precision: int = 50
    threads: int = 1

    @property
    def db_path(self) -> str:
        return os.path.join(self.cache_dir, 'results.db')


def _env_int(key: str, default: int) -> int:
    raw = os.getenv(key)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{key} must be an integer, got {raw!r}")


def load_settings(**overrides) -> Settings:
    """
    Build Settings from the environment (.env already loaded), then apply overrides.

    Args:
        overrides: any Settings field; None values are ignored

    Returns:
        Settings instance with ceilings checked against HARD_N_LIMIT
    """
    values = {
        'cache_dir': os.getenv('SYMCHAR_CACHE_DIR') or Settings.cache_dir,
        'n_ceiling': _env_int('SYMCHAR_N_CEILING', Settings.n_ceiling),
        'brute_ceiling': _env_int('SYMCHAR_BRUTE_CEILING', Settings.brute_ceiling),
        'log_file': os.getenv('SYMCHAR_LOG_FILE') or None,
        'seed': _env_int('SYMCHAR_SEED', Settings.seed),
        'precision': _env_int('SYMCHAR_PRECISION', Settings.precision),
        'threads': _env_int('SYMCHAR_THREADS', Settings.threads),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})

    settings = Settings(**values)

    for field_name in ('n_ceiling', 'brute_ceiling', 'torsion_brute_ceiling'):
        value = getattr(settings, field_name)
        if value > HARD_N_LIMIT:
            raise ResourceLimitError(f"{field_name}={value} exceeds the hard limit {HARD_N_LIMIT}")
    if settings.threads < 1:
        raise UsageError("threads must be at least 1")
    if settings.precision < 15:
        raise UsageError("precision must be at least 15 digits")

    return settings


def check_ceiling(n: int, ceiling: int, what: str):
    if n > ceiling:
        raise ResourceLimitError(f"{what}: n={n} is above the configured ceiling {ceiling}")


# Factorials

class FactorialTable:
    """Factorials 0..ceiling, extended on demand; falling factorials read off the table."""

    def __init__(self, ceiling: int = 64):
        self._fact = [1]
        self._extend(ceiling)

    def _extend(self, n: int):
        while len(self._fact) <= n:
            self._fact.append(self._fact[-1] * len(self._fact))

    def factorial(self, n: int) -> int:
        if n < 0:
            raise PreconditionError(f"factorial of negative number {n}")
        self._extend(n)
        return self._fact[n]

    def falling(self, n: int, k: int) -> int:
        """(n)_k = n!/(n-k)!, zero when k > n."""
        if k < 0:
            raise PreconditionError(f"falling factorial with k={k}")
        if k > n:
            return 0
        return self.factorial(n) // self.factorial(n - k)


FACTORIALS = FactorialTable()


def factorial(n: int) -> int:
    return FACTORIALS.factorial(n)


def falling_factorial(n: int, k: int) -> int:
    return FACTORIALS.falling(n, k)


def as_integer(value, what: str) -> int:
    """Convert an exact value that must be integral; anything else is an IntegrityError."""
    value = Fraction(value)
    if value.denominator != 1:
        raise IntegrityError(f"{what} is not an integer: {value}")
    return value.numerator


# Exact-number serialization

def format_exact(value) -> str:
    """int -> '123', Fraction -> 'p/q' (or 'p' if integral)."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_exact(text: str) -> Fraction:
    return Fraction(text.strip())


# Parallel map

def parallel_map(func, items, threads: int = 1, chunksize: int = 1) -> list:
    """
    Map a picklable top-level function over items, keeping input order

    Args:
        func: module-level function
        items: ordered inputs
        threads: worker processes; 1 runs serially in this process
        chunksize: items per task handed to each worker

    Returns:
        list of results in the same order as items
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
