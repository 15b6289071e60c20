"""JSON documents that remember where each object starts"""

import json
import json.scanner
from pathlib import Path

from PaulSim.utilities.exceptions import ConfigError


class LineDict(dict):
    line = None


class LineList(list):
    line = None


class LineTrackingDecoder(json.JSONDecoder):
    """
    JSONDecoder whose objects and arrays carry the 1-based line they start on.

    The pure-Python scanner is used because the C scanner ignores overridden
    parse_object / parse_array hooks.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        parse_object, parse_array = self.parse_object, self.parse_array

        def _object(s_and_end, *rest):
            s, end = s_and_end
            values, new_end = parse_object(s_and_end, *rest)
            out = LineDict(values)
            out.line = s.count('\n', 0, end) + 1
            return out, new_end

        def _array(s_and_end, *rest):
            s, end = s_and_end
            values, new_end = parse_array(s_and_end, *rest)
            out = LineList(values)
            out.line = s.count('\n', 0, end) + 1
            return out, new_end

        self.parse_object = _object
        self.parse_array = _array
        self.scan_once = json.scanner.py_make_scanner(self)


def loads(text):
    try:
        return json.loads(text, cls=LineTrackingDecoder)
    except json.JSONDecodeError as err:
        raise ConfigError('invalid JSON: %s' % err.msg, line=err.lineno) from None


def load(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as err:
        raise ConfigError('cannot read %s: %s' % (path, err.strerror)) from None
    return loads(text)


def line_of(obj, default=None):
    return getattr(obj, 'line', default)


def require(mapping, key, kind=None, what='entry'):
    """Fetch mapping[key], raising a line-tagged ConfigError if absent or mistyped."""
    if not isinstance(mapping, dict):
        raise ConfigError('%s must be an object' % what, line=line_of(mapping))
    if key not in mapping:
        raise ConfigError("%s is missing required key '%s'" % (what, key), line=line_of(mapping))
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError("'%s' in %s has the wrong type (%s)" % (key, what, type(value).__name__),
                          line=line_of(value, line_of(mapping)))
    return value


def reject_unknown(mapping, allowed, what='entry'):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError('%s has unknown key(s) %s; allowed: %s'
                          % (what, ', '.join(unknown), ', '.join(sorted(allowed))),
                          line=line_of(mapping))


def to_plain(obj):
    """Strip line annotations (for hashing and echoing)."""
    if isinstance(obj, dict):
        return {k: to_plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [to_plain(v) for v in obj]
    return obj
