"""
Run configuration loader from YAML files
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog
import yaml
from pydantic import ValidationError

from ..errors import ConfigError
from .models import RunConfig

logger = structlog.get_logger()


def _key_lines(text: str) -> Dict[str, int]:
    """Dotted key path -> 1-based source line, from the YAML node tree"""
    lines: Dict[str, int] = {}

    def walk(node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                lines[path] = key_node.start_mark.line + 1
                walk(value_node, path)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                path = f"{prefix}.{i}" if prefix else str(i)
                lines[path] = item.start_mark.line + 1
                walk(item, path)

    try:
        walk(yaml.compose(text), "")
    except yaml.YAMLError:
        pass
    return lines


def _locate(loc: Sequence[Any], lines: Dict[str, int]) -> Optional[int]:
    parts = [str(p) for p in loc]
    while parts:
        line = lines.get(".".join(parts))
        if line is not None:
            return line
        parts.pop()
    return None


def apply_override(data: dict, assignment: str) -> None:
    """Apply one `dotted.path=value` override; the value is parsed as YAML"""
    if "=" not in assignment:
        raise ConfigError(f"override '{assignment}' is not of the form key=value")
    key, raw = assignment.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"override '{assignment}' has an empty key")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"override '{assignment}': unparseable value: {e}") from e

    node: Any = data
    for depth, part in enumerate(parts):
        last = depth == len(parts) - 1
        here = ".".join(parts[: depth + 1])
        if isinstance(node, list):
            if not part.isdigit() or int(part) >= len(node):
                raise ConfigError(f"override '{key}': no list element '{here}'")
            if last:
                node[int(part)] = value
            else:
                node = node[int(part)]
        elif isinstance(node, dict):
            if last:
                node[part] = value
            else:
                node = node.setdefault(part, {})
        else:
            raise ConfigError(f"override '{key}': '{here}' is inside a scalar")


def load_run_config(
    path: str | Path,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
) -> RunConfig:
    """
    Read, override and validate a run configuration.

    Raises:
        ConfigError: unreadable file, YAML syntax error, bad override or
            schema violation. Diagnostics carry the source line and the
            dotted field path.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"{path}: invalid YAML", [f"{where}{problem}"]) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: a run configuration must be a mapping")

    for assignment in overrides:
        apply_override(data, assignment)
    if seed is not None:
        data["seed"] = seed

    try:
        config = RunConfig.model_validate(data, context={"base_dir": str(path.parent)})
    except ValidationError as e:
        lines = _key_lines(text)
        diagnostics = []
        for error in e.errors():
            field = ".".join(str(p) for p in error["loc"]) or "(root)"
            line = _locate(error["loc"], lines)
            prefix = f"line {line}: " if line else ""
            diagnostics.append(f"{prefix}{field}: {error['msg']}")
        raise ConfigError(f"{path}: {len(diagnostics)} configuration error(s)", diagnostics) from e

    logger.info("run_config_loaded", name=config.name, file=str(path), pipelines=len(config.pipelines))
    return config
