"""
TOML writer for the forest rule explainer.

Writes TOML documents (model bundle manifest) with tomli-w.
Output is deterministic: same data, same bytes.
"""

import sys
from pathlib import Path
from typing import Any

try:
    import tomllib
except ImportError:
    try:
        import tomli as tomllib
    except ImportError:
        print("ERROR: tomllib (Python 3.11+) or tomli required for TOML reading")
        sys.exit(1)

try:
    import tomli_w
except ImportError:
    print("ERROR: tomli-w required for TOML writing. Install with: pip install tomli-w")
    sys.exit(1)

from util.logging_setup import get_logger


logger = get_logger(__name__)


def write_toml(path: Path, data: dict[str, Any]) -> None:
    """
    Write a TOML document.

    Args:
        path: Target file (parent directories are created)
        data: TOML-compatible mapping (no None values)

    Raises:
        IOError: If the file cannot be written or data is not TOML-compatible
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            tomli_w.dump(data, f)
        logger.info(f"Wrote {path}")
    except (TypeError, ValueError) as e:
        error_msg = f"Data not representable as TOML: {e}"
        logger.error(error_msg)
        raise IOError(error_msg) from e
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise


def read_toml(path: Path) -> dict[str, Any]:
    """
    Read a TOML document.

    Raises:
        FileNotFoundError: If the file doesn't exist
        IOError: If the file is not valid TOML
    """
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        error_msg = f"Failed to parse {path.name}: {e}"
        logger.error(error_msg)
        raise IOError(error_msg) from e
