"""
Parser for the line-oriented sweep config format

    # comment
    key = value            top-level settings
    [modes]                energy weight tag
    [coupling]             index, then one amplitude per mode (a+bj allowed)
    [sweep]                axis = values
"""
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, Union

from pydantic import ValidationError

from harness.models import SweepConfig
from utils.errors import ConfigError


logger = logging.getLogger(__name__)

SECTIONS = ("modes", "coupling", "sweep")


def _words(value: str) -> List[str]:
    return value.split()


def _floats(value: str) -> List[float]:
    return [float(x) for x in value.split()]


def _ints(value: str) -> List[int]:
    return [int(x) for x in value.split()]


SCALAR_KEYS: Dict[str, Callable[[str], Any]] = {
    'label': str,
    'order': int,
    'eta': float,
    'alpha': _floats,
    'cutoffs': _ints,
    'checks': _words,
    'seed': int,
    'workers': int,
    'output': str,
    'tol': float,
    'eigen_count': int,
    'method': str,
}


def _strip(line: str) -> str:
    return line.split('#', 1)[0].strip()


def _amplitude(token: str) -> Tuple[float, float]:
    z = complex(token.replace('i', 'j'))
    return (z.real, z.imag)


class ConfigParser:
    """Collects raw values and remembers the line each field came from"""

    def __init__(self, source: str):
        self.source = source
        self.data: Dict[str, Any] = {'modes': [], 'coupling': {}, 'sweep': {}}
        self.lines: Dict[str, int] = {}
        self.mode_lines: List[int] = []

    def parse(self, text: str) -> Dict[str, Any]:
        section = None
        for number, raw in enumerate(text.splitlines(), start=1):
            line = _strip(raw)
            if not line:
                continue
            if line.startswith('['):
                if not line.endswith(']') or line[1:-1].strip() not in SECTIONS:
                    raise ConfigError(f"unknown section {line}", line=number)
                section = line[1:-1].strip()
                self.lines.setdefault(section, number)
                continue
            if section is None:
                self._scalar(line, number)
            elif section == 'modes':
                self._mode(line, number)
            elif section == 'coupling':
                self._coupling(line, number)
            else:
                self._axis(line, number)
        return self.data

    def _scalar(self, line: str, number: int):
        key, sep, value = (part.strip() for part in line.partition('='))
        if not sep:
            raise ConfigError("expected 'key = value'", line=number)
        if key not in SCALAR_KEYS:
            raise ConfigError(f"unknown key '{key}'", line=number, field=key)
        if key in self.data:
            raise ConfigError(f"'{key}' is set twice", line=number, field=key)
        try:
            self.data[key] = SCALAR_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse '{value}': {exc}", line=number, field=key) from exc
        self.lines[key] = number

    def _mode(self, line: str, number: int):
        k = len(self.data['modes'])
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ConfigError("mode rows are 'energy weight [tag]'", line=number, field=f"modes[{k}]")
        try:
            energy, weight = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"cannot parse mode row: {exc}", line=number, field=f"modes[{k}]") from exc
        if not energy > 0:
            raise ConfigError(f"mode {k}: energy must be positive (got {energy})",
                              line=number, field=f"modes[{k}].energy")
        row = {'energy': energy, 'weight': weight}
        if len(parts) == 3:
            row['tag'] = parts[2]
        self.data['modes'].append(row)
        self.mode_lines.append(number)

    def _coupling(self, line: str, number: int):
        parts = line.split()
        try:
            index = int(parts[0])
            amplitudes = [_amplitude(token) for token in parts[1:]]
        except ValueError as exc:
            raise ConfigError(f"cannot parse coupling row: {exc}", line=number, field="coupling") from exc
        if index in self.data['coupling']:
            raise ConfigError(f"coupling row {index} is given twice", line=number, field=f"coupling.{index}")
        self.data['coupling'][index] = amplitudes
        self.lines[f"coupling.{index}"] = number

    def _axis(self, line: str, number: int):
        axis, sep, value = (part.strip() for part in line.partition('='))
        if not sep:
            raise ConfigError("expected 'axis = values'", line=number, field="sweep")
        try:
            self.data['sweep'][axis] = _floats(value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse axis values: {exc}", line=number, field=f"sweep.{axis}") from exc
        self.lines[f"sweep.{axis}"] = number

    def line_for(self, loc: Tuple[Union[str, int], ...]) -> Union[int, None]:
        if not loc:
            return None
        head = str(loc[0])
        if head == 'modes' and len(loc) > 1 and isinstance(loc[1], int) and loc[1] < len(self.mode_lines):
            return self.mode_lines[loc[1]]
        if len(loc) > 1:
            nested = f"{head}.{loc[1]}"
            if nested in self.lines:
                return self.lines[nested]
        return self.lines.get(head)


def parse_config(text: str, source: str = "<string>") -> SweepConfig:
    """Parse and validate config text; errors carry line and field"""
    parser = ConfigParser(source)
    data = parser.parse(text)
    try:
        config = SweepConfig.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = tuple(error.get('loc', ()))
        field = ".".join(str(part) for part in loc) or None
        message = str(error.get('msg', exc)).removeprefix("Value error, ")
        raise ConfigError(message, line=parser.line_for(loc), field=field) from exc
    logger.debug(f"Parsed config {source}: {len(config.grid())} grid points")
    return config


def load_config(path: Union[str, Path]) -> SweepConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))
