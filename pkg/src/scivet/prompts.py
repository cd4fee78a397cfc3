"""Prompt template files: location, parsing, placeholder filling, hashing.

Each template is a text file with a ``[system]`` section and a ``[user]``
section.  Placeholders look like ``{name}`` and are replaced literally, so
braces elsewhere in the template text are left alone.
"""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path


class TemplateError(Exception):
    """A template file is missing, malformed, or lacks a required placeholder."""


TEMPLATE_NAMES = (
    "generate_pair",
    "summary_extractive",
    "summary_abstractive",
    "evidence_select",
    "inference_zero_shot",
    "inference_few_shot",
    "inference_dov_cot",
)

EXEMPLARS_FILE = "exemplars.json"


def _packaged_root():
    return resources.files("scivet").joinpath("templates")


def _read(name: str, templates_dir: str | Path | None) -> str:
    filename = f"{name}.txt" if not name.endswith(".json") else name
    if templates_dir is not None:
        path = Path(templates_dir) / filename
        if not path.exists():
            raise TemplateError(f"template file {path} does not exist")
        return path.read_text(encoding="utf-8")
    entry = _packaged_root().joinpath(filename)
    try:
        return entry.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TemplateError(f"packaged template {filename} is missing") from None


def load_template(name: str, templates_dir: str | Path | None = None) -> tuple[str, str]:
    """Return the (system, user) message pair for ``name``."""
    text = _read(name, templates_dir)
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.splitlines():
        marker = line.strip().lower()
        if marker in ("[system]", "[user]"):
            current = sections.setdefault(marker[1:-1], [])
            continue
        if current is not None:
            current.append(line)
    if "system" not in sections or "user" not in sections:
        raise TemplateError(f"template {name!r} must contain [system] and [user] sections")
    system = "\n".join(sections["system"]).strip()
    user = "\n".join(sections["user"]).strip()
    if not user:
        raise TemplateError(f"template {name!r} has an empty [user] section")
    return system, user


def fill(template: str, **values: str) -> str:
    """Substitute ``{name}`` placeholders; every named value must appear."""
    out = template
    for key, value in values.items():
        placeholder = "{" + key + "}"
        if placeholder not in out:
            raise TemplateError(f"template is missing the {placeholder} placeholder")
        out = out.replace(placeholder, value)
    return out


def load_exemplars(templates_dir: str | Path | None = None) -> list[dict]:
    """Few-shot exemplars: list of {text, label, reason} dicts, reliable first."""
    raw = _read(EXEMPLARS_FILE, templates_dir)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"exemplars file is not valid JSON ({exc.msg})") from None
    exemplars = data.get("exemplars") if isinstance(data, dict) else data
    if not isinstance(exemplars, list) or len(exemplars) != 2:
        raise TemplateError("exemplars file must supply exactly two exemplars")
    labels = [str(e.get("label", "")).lower() for e in exemplars]
    if sorted(labels) != ["reliable", "unreliable"]:
        raise TemplateError("exemplars must be one reliable and one unreliable example")
    if labels[0] != "reliable":
        exemplars = [exemplars[1], exemplars[0]]
    for exemplar in exemplars:
        if not exemplar.get("text") or not exemplar.get("reason"):
            raise TemplateError("each exemplar needs non-empty text and reason")
    return exemplars


def template_hashes(templates_dir: str | Path | None = None) -> dict[str, str]:
    """sha256 of every template file, for run manifests."""
    hashes = {}
    for name in TEMPLATE_NAMES:
        content = _read(name, templates_dir)
        hashes[f"{name}.txt"] = hashlib.sha256(content.encode("utf-8")).hexdigest()
    try:
        content = _read(EXEMPLARS_FILE, templates_dir)
    except TemplateError:
        pass
    else:
        hashes[EXEMPLARS_FILE] = hashlib.sha256(content.encode("utf-8")).hexdigest()
    return hashes
