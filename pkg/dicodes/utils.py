import os
import json
import hashlib
import logging
import numpy as np
from dicodes import config


def setup_logger(name):
    """
    Configure logging with file and console handlers.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, config.LOG_LEVEL))

    # Prevent duplicate handlers if logger already configured
    if logger.handlers:
        return logger

    os.makedirs(config.LOGS_PATH, exist_ok=True)

    # File handler
    log_file = os.path.join(config.LOGS_PATH, config.LOG_FILE_NAME)
    fh = logging.FileHandler(log_file)
    fh.setLevel(logging.DEBUG)

    # Console handler
    ch = logging.StreamHandler()
    ch.setLevel(logging.INFO)

    formatter = logging.Formatter(config.LOG_FORMAT)
    fh.setFormatter(formatter)
    ch.setFormatter(formatter)

    logger.addHandler(fh)
    logger.addHandler(ch)

    return logger


def derive_rng(master_seed, stream_id, *counter):
    """
    Build an independent generator for one (seed, stream, counter) coordinate.

    The seed material is hashed by SeedSequence, so two coordinates never
    share state and the draw for a given coordinate does not depend on which
    thread asks for it or in what order.

    Args:
        master_seed: Experiment master seed
        stream_id: Subsystem stream id (see config.STREAM_*)
        *counter: Further integer coordinates (message index, chunk index, ...)

    Returns:
        numpy.random.Generator
    """
    entropy = [int(master_seed), int(stream_id)] + [int(c) for c in counter]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(master_seed, *counter):
    """
    Derive a 63-bit child seed from a master seed and integer coordinates.

    Args:
        master_seed: Parent seed
        *counter: Integer coordinates

    Returns:
        int: Child seed
    """
    entropy = [int(master_seed)] + [int(c) for c in counter]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def calculate_file_hash(file_path):
    """
    Generate SHA-256 hash of a file.

    Args:
        file_path: Path to file

    Returns:
        str: Hex digest of file hash
    """
    sha256_hash = hashlib.sha256()

    with open(file_path, "rb") as f:
        for byte_block in iter(lambda: f.read(4096), b""):
            sha256_hash.update(byte_block)

    return sha256_hash.hexdigest()


def canonical_hash(document):
    """
    SHA-256 of the canonical JSON encoding of a document.

    Args:
        document: JSON-serializable object

    Returns:
        str: Hex digest
    """
    payload = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def atomic_write_text(path, text):
    """
    Write text to path via a temporary file and an atomic rename.

    Args:
        path: Destination file
        text: Content

    Returns:
        bool: True if successful
    """
    temp_path = path + ".tmp"
    logger = setup_logger(__name__)

    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(temp_path, "w", newline="") as f:
            f.write(text)

        os.replace(temp_path, path)
        return True

    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        if os.path.exists(temp_path):
            try:
                os.remove(temp_path)
            except OSError:
                pass
        return False


def format_number(value):
    """
    Format a number for CSV output; None becomes an empty cell.

    Integers stay integers, floats keep 17 significant digits so a value
    re-reads to the identical double.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if np.isnan(value):
        return ""
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"
