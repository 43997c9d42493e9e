"""
Subprocess executor: runs external design tools in a per-task sandbox.

The command template is a string with named placeholders. After rendering it
is split shell-style and launched without a shell inside the task's sandbox
directory; declared output files are parsed once the process exits. The
sandbox is emptied before every launch. Generation params are written to
params.yaml in the sandbox and scalar ones are also available as
{param_<key>} placeholders.
"""

import asyncio
import hashlib
import math
import re
import shlex
import shutil
import string
from pathlib import Path
from typing import Any, Dict, List, Optional

import aiofiles
import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field

from ..config import settings
from ..domain.models import (
    CandidateSequence,
    OriginKind,
    ProteinStructure,
    QualityMetrics,
    StructureOrigin,
)
from ..errors import FastaParseError
from ..protocol.fasta import parse_fasta
from .base import (
    ExecutorBase,
    GenerationOutput,
    GenerationPayload,
    PredictionOutput,
    PredictionPayload,
    TaskResult,
    TaskSpec,
    TaskStatus,
)

logger = structlog.get_logger()

# Placeholders a template may reference, per task kind
GENERATION_FIELDS = frozenset({
    "task_id", "sandbox", "input_structure", "num_sequences",
    "scores_file", "sequences_file", "params_file",
})
# Generation params with identifier keys are also exposed as {param_<key>}
PARAM_PREFIX = "param_"
PREDICTION_FIELDS = frozenset({
    "task_id", "sandbox", "fasta", "sequence_id",
    "metrics_file", "structure_file",
})

_METRIC_LINE = re.compile(
    r"^\s*(plddt|ptm|iface_pae)\s*(?:[:=]|\s)\s*(\S+)\s*$", re.IGNORECASE
)
_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")
_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ParseRules(BaseModel):
    """Names of the files a tool writes into its sandbox"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    scores_file: str = "scores.tsv"
    sequences_file: str = "sequences.fasta"
    metrics_file: str = "metrics.txt"
    structure_file: str = "model.pdb"


class SubprocessParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    generation_command: str
    prediction_command: str
    parse_rules: ParseRules = Field(default_factory=ParseRules)
    sandbox_root: Optional[str] = None
    timeout_seconds: Optional[float] = Field(None, gt=0)


class TemplateError(ValueError):
    pass


def sandbox_name(task_id: str) -> str:
    """Directory name for a task; readable prefix plus a digest of the full id"""
    digest = hashlib.blake2b(task_id.encode(), digest_size=6).hexdigest()
    return f"{_UNSAFE.sub('_', task_id)[:64]}-{digest}"


def render_command(template: str, fields: Dict[str, str], allowed: frozenset) -> List[str]:
    """Render a command template into an argv list"""
    try:
        parsed = list(string.Formatter().parse(template))
    except ValueError as e:
        raise TemplateError(str(e)) from e
    for _, name, _, _ in parsed:
        if name is None:
            continue
        if not name or name not in allowed:
            raise TemplateError(f"unknown placeholder '{{{name}}}'")
    try:
        argv = shlex.split(template.format_map(fields))
    except (KeyError, ValueError) as e:
        raise TemplateError(str(e)) from e
    if not argv:
        raise TemplateError("empty command")
    return argv


def param_fields(params: Dict[str, Any]) -> Dict[str, str]:
    """Scalar generation params as {param_<key>} placeholder values"""
    fields = {}
    for key, value in params.items():
        if not _IDENTIFIER.match(str(key)) or isinstance(value, (dict, list, tuple)):
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        fields[f"{PARAM_PREFIX}{key}"] = str(value)
    return fields


def local_structure_file(payload: str) -> Optional[Path]:
    """The payload as an existing file path, or None when it is inline content"""
    if not payload or "\n" in payload:
        return None
    try:
        path = Path(payload)
        return path if path.is_file() else None
    except OSError:
        return None


def parse_scores(text: str, fasta_residues: Optional[Dict[str, str]] = None) -> List[tuple]:
    """
    Parse a scores table: one `id<TAB>log_likelihood[<TAB>residues]` per line.

    Residues missing from the table are looked up in fasta_residues.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"scores line {lineno}: expected id and log-likelihood")
        seq_id = parts[0].strip()
        ll = float(parts[1])
        if not math.isfinite(ll):
            raise ValueError(f"scores line {lineno}: non-finite log-likelihood")
        residues = parts[2].strip() if len(parts) > 2 else (fasta_residues or {}).get(seq_id)
        if not residues:
            raise ValueError(f"scores line {lineno}: no residues for '{seq_id}'")
        rows.append((seq_id, ll, residues))
    if not rows:
        raise ValueError("scores file is empty")
    return rows


def parse_metrics(text: str) -> QualityMetrics:
    """Three labeled lines: plddt, ptm and iface_pae, separated by ':', '=' or whitespace"""
    values: Dict[str, float] = {}
    for raw in text.splitlines():
        match = _METRIC_LINE.match(raw)
        if match:
            values[match.group(1).lower()] = float(match.group(2))
    missing = [k for k in ("plddt", "ptm", "iface_pae") if k not in values]
    if missing:
        raise ValueError(f"missing {', '.join(missing)}")
    return QualityMetrics(**values)


async def _read(path: Path) -> str:
    async with aiofiles.open(path, "r") as f:
        return await f.read()


async def _write(path: Path, content: str) -> None:
    async with aiofiles.open(path, "w") as f:
        await f.write(content)


async def subprocess_execute(
    task: TaskSpec,
    command_template: str,
    parse_rules: ParseRules | None = None,
    sandbox_root: str | Path | None = None,
    timeout: float | None = None,
) -> TaskResult:
    """
    Run one task through an external command.

    Returns a FAILED result with a stage-specific reason for template errors,
    timeouts, nonzero exits and missing or unparseable outputs.
    """
    rules = parse_rules or ParseRules()
    root = Path(sandbox_root or settings.sandbox_root)
    timeout = timeout or settings.subprocess_timeout_seconds
    sandbox = root / sandbox_name(task.id)
    # a re-run of the same task id starts from an empty sandbox
    if sandbox.exists():
        await asyncio.to_thread(shutil.rmtree, sandbox)
    sandbox.mkdir(parents=True)

    payload = task.payload
    fields = {"task_id": task.id, "sandbox": str(sandbox)}
    if isinstance(payload, GenerationPayload):
        structure_path = local_structure_file(payload.structure.payload)
        if structure_path is None:
            structure_path = sandbox / "input_structure.pdb"
            await _write(structure_path, payload.structure.payload)
        params_path = sandbox / "params.yaml"
        await _write(params_path, yaml.safe_dump(dict(payload.generation_params), sort_keys=True))
        extra = param_fields(payload.generation_params)
        allowed = GENERATION_FIELDS | frozenset(extra)
        fields.update(
            input_structure=str(structure_path),
            num_sequences=str(payload.num_sequences),
            scores_file=str(sandbox / rules.scores_file),
            sequences_file=str(sandbox / rules.sequences_file),
            params_file=str(params_path),
            **extra,
        )
    else:
        allowed = PREDICTION_FIELDS
        fasta_path = sandbox / "query.fasta"
        await _write(fasta_path, payload.fasta)
        fields.update(
            fasta=str(fasta_path),
            sequence_id=payload.sequence.id,
            metrics_file=str(sandbox / rules.metrics_file),
            structure_file=str(sandbox / rules.structure_file),
        )

    try:
        argv = render_command(command_template, fields, allowed)
    except TemplateError as e:
        return TaskResult.failed(task.id, f"template error: {e}")

    logger.debug("subprocess_launch", task_id=task.id, argv=argv, sandbox=str(sandbox))
    try:
        process = await asyncio.create_subprocess_exec(
            *argv,
            stdout=asyncio.subprocess.PIPE,
            stderr=asyncio.subprocess.PIPE,
            cwd=str(sandbox),
        )
    except OSError as e:
        return TaskResult.failed(task.id, f"launch failed: {e}")

    try:
        stdout, stderr = await asyncio.wait_for(process.communicate(), timeout=timeout)
    except asyncio.TimeoutError:
        process.kill()
        await process.wait()
        return TaskResult.failed(task.id, f"timeout after {timeout:g}s")

    await _write(sandbox / "stdout.log", stdout.decode("utf-8", errors="replace"))
    await _write(sandbox / "stderr.log", stderr.decode("utf-8", errors="replace"))
    if process.returncode != 0:
        logger.warning("subprocess_failed", task_id=task.id, exit_code=process.returncode)
        return TaskResult.failed(task.id, f"exit {process.returncode}")

    if isinstance(payload, GenerationPayload):
        return await _collect_generation(task, payload, sandbox, rules)
    return await _collect_prediction(task, payload, sandbox, rules)


async def _collect_generation(
    task: TaskSpec, payload: GenerationPayload, sandbox: Path, rules: ParseRules
) -> TaskResult:
    scores_path = sandbox / rules.scores_file
    if not scores_path.is_file():
        return TaskResult.failed(task.id, "scores file absent")

    fasta_residues = None
    fasta_path = sandbox / rules.sequences_file
    if fasta_path.is_file():
        try:
            fasta_residues = dict(parse_fasta(await _read(fasta_path)))
        except FastaParseError as e:
            return TaskResult.failed(task.id, f"sequences file unparseable: {e}")

    try:
        rows = parse_scores(await _read(scores_path), fasta_residues)
        sequences = [
            CandidateSequence(
                id=seq_id,
                residues=residues,
                log_likelihood=ll,
                source_structure=payload.structure.id,
            )
            for seq_id, ll, residues in rows
        ]
    except ValueError as e:
        return TaskResult.failed(task.id, f"scores file unparseable: {e}")

    return TaskResult(
        task_id=task.id,
        status=TaskStatus.SUCCEEDED,
        outputs=GenerationOutput(sequences=sequences),
    )


async def _collect_prediction(
    task: TaskSpec, payload: PredictionPayload, sandbox: Path, rules: ParseRules
) -> TaskResult:
    metrics_path = sandbox / rules.metrics_file
    if not metrics_path.is_file():
        return TaskResult.failed(task.id, "metrics file absent")
    structure_path = sandbox / rules.structure_file
    if not structure_path.is_file():
        return TaskResult.failed(task.id, "structure file absent")

    try:
        metrics = parse_metrics(await _read(metrics_path))
    except ValueError as e:
        return TaskResult.failed(task.id, f"metrics file unparseable: {e}")

    structure = ProteinStructure(
        id=f"{task.id}.model",
        payload=str(structure_path),
        origin=StructureOrigin(
            kind=OriginKind.PREDICTED,
            cycle=task.provenance.cycle,
            sequence_id=payload.sequence.id,
        ),
        metrics=metrics,
    )
    return TaskResult(
        task_id=task.id,
        status=TaskStatus.SUCCEEDED,
        outputs=PredictionOutput(structure=structure, metrics=metrics),
    )


class SubprocessExecutor(ExecutorBase):
    """Runs generation and prediction tasks through configured command templates"""

    name = "subprocess"

    def __init__(self, params: SubprocessParams):
        super().__init__()
        self.params = params

    async def _run(self, task: TaskSpec) -> TaskResult:
        template = (
            self.params.generation_command
            if isinstance(task.payload, GenerationPayload)
            else self.params.prediction_command
        )
        return await subprocess_execute(
            task,
            template,
            self.params.parse_rules,
            sandbox_root=self.params.sandbox_root,
            timeout=self.params.timeout_seconds,
        )
