import json
import logging
import os.path

import pandas as pd

from .exception import GameFormatError
from .game import PopulationGame
from .multiclass import MultiClassGame, is_multiclass_document
from .params import parse_vector

try:
    import fcntl

    use_fcntl = True
except ImportError:
    use_fcntl = False

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def read_file(base, key):
    file_path = os.path.join(base, key)
    if not os.path.exists(file_path):
        return None

    try:
        with open(file_path, "r", encoding="UTF-8", newline="") as f:
            lock_file(f)
            return f.read()
    except OSError:
        logger.exception("[read-file] read file failed, file path:%s" % file_path)
        return None


def save_file(base, key, content):
    file_path = os.path.join(base, key)
    if base and not os.path.isdir(base):
        try:
            os.makedirs(base)
        except OSError:
            logger.warning("[save-file] dir %s is already exist" % base)

    try:
        with open(file_path, "wb") as f:
            lock_file(f)
            f.write(content if type(content) == bytes else content.encode("UTF-8"))
    except OSError:
        logger.exception("[save-file] save file failed, file path:%s" % file_path)
        raise


def lock_file(f):
    if use_fcntl:
        fcntl.flock(f, fcntl.LOCK_EX)


def _split(path):
    path = os.path.abspath(path)
    return os.path.dirname(path), os.path.basename(path)


def load_json(path):
    content = read_file(*_split(path))
    if content is None:
        raise GameFormatError("Cannot read %s." % path)
    try:
        return json.loads(content)
    except ValueError as e:
        logger.error("[load-json] bad json, file path:%s, error:%s" % (path, e))
        raise GameFormatError("%s is not valid JSON: %s" % (path, e))


def dump_json(obj):
    """Stable text: sorted keys, shortest round-trip float repr."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_json(path, obj):
    save_file(*_split(path), dump_json(obj))
    logger.debug("[save-json] file path:%s" % path)


def load_game(path):
    """A ``PopulationGame``, or a ``MultiClassGame`` when the document has a ``classes`` list."""
    d = load_json(path)
    if is_multiclass_document(d):
        return MultiClassGame.from_dict(d)
    return PopulationGame.from_dict(d)


def save_game(path, game):
    save_json(path, game.to_dict())


def load_point(text):
    """
    Parse a point given inline (``0.4,0.3,0.3``; blocks separated by ``;``) or as
    a file holding a JSON list or a result document with ``x_final``.
    """
    if text is None:
        raise GameFormatError("No point given.")
    if os.path.isfile(text):
        d = load_json(text)
        if isinstance(d, dict):
            if "x_final" not in d:
                raise GameFormatError("%s has no x_final field." % text)
            d = d["x_final"]
        if not isinstance(d, list) or not d:
            raise GameFormatError("%s does not hold a point." % text)
        try:
            if isinstance(d[0], list):
                return [[float(v) for v in block] for block in d]
            return [float(v) for v in d]
        except (TypeError, ValueError):
            raise GameFormatError("%s holds non-numeric components." % text)
    if ";" in text:
        return [parse_vector(block) for block in text.split(";")]
    return parse_vector(text)


def read_csv(path, columns=()):
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, ValueError) as e:
        logger.exception("[read-csv] read csv failed, file path:%s" % path)
        raise GameFormatError("Cannot read CSV %s: %s" % (path, e))
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise GameFormatError("%s lacks column(s): %s." % (path, ", ".join(missing)))
    return frame


def write_csv(path, frame):
    base, _ = _split(path)
    if not os.path.isdir(base):
        os.makedirs(base)
    try:
        with open(path, "w", encoding="UTF-8", newline="") as f:
            lock_file(f)
            frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT)
    except OSError:
        logger.exception("[write-csv] write csv failed, file path:%s" % path)
        raise
    logger.debug("[write-csv] file path:%s, rows:%s" % (path, len(frame)))
