"""STIX 2.x bundle parsing and technique/sample extraction.

Reads ATT&CK-style bundles (attack-pattern, relationship, intrusion-set,
malware, tool objects) plus CAPEC bundles referenced from attack-pattern
external_references. The class space is parent techniques only;
sub-technique ids are folded onto their parent and kept as metadata.
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ParseError, SchemaError

logger = logging.getLogger(__name__)

TECHNIQUE_ID = re.compile(r"^T\d{4}$")
SUBTECHNIQUE_ID = re.compile(r"^T\d{4}\.\d{3}$")

ATTACK_SOURCE_NAMES = frozenset(
    {"mitre-attack", "mitre-mobile-attack", "mitre-ics-attack"}
)


@dataclass(frozen=True)
class ExternalReference:
    source_name: str = ""
    external_id: str = ""
    url: str = ""


@dataclass(frozen=True)
class StixObject:
    id: str
    type: str
    name: Optional[str] = None
    description: Optional[str] = None
    external_references: tuple[ExternalReference, ...] = ()
    kill_chain_phases: tuple[str, ...] = ()
    source_ref: Optional[str] = None
    target_ref: Optional[str] = None
    revoked: bool = False
    deprecated: bool = False
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def attack_external_id(self) -> Optional[str]:
        """MITRE technique id (Txxxx or Txxxx.yyy) if one is referenced."""
        for ref in self.external_references:
            if ref.source_name in ATTACK_SOURCE_NAMES and (
                TECHNIQUE_ID.match(ref.external_id)
                or SUBTECHNIQUE_ID.match(ref.external_id)
            ):
                return ref.external_id
        return None

    def capec_ids(self) -> tuple[str, ...]:
        return tuple(
            ref.external_id
            for ref in self.external_references
            if ref.source_name == "capec" and ref.external_id
        )


@dataclass(frozen=True)
class StixBundle:
    objects: tuple[StixObject, ...]
    object_index: dict

    def by_type(self, type_name: str) -> list[StixObject]:
        return [o for o in self.objects if o.type == type_name]


def _parse_object(item: dict) -> StixObject:
    oid = item.get("id", "")
    otype = item.get("type", "")
    if not oid or not otype:
        raise SchemaError(f"object missing id or type: {item!r:.120}")
    refs = tuple(
        ExternalReference(
            source_name=r.get("source_name", ""),
            external_id=r.get("external_id", ""),
            url=r.get("url", ""),
        )
        for r in item.get("external_references", [])
    )
    phases = tuple(
        p.get("phase_name", "")
        for p in item.get("kill_chain_phases", [])
        if p.get("phase_name")
    )
    if otype == "relationship" and not (
        item.get("source_ref") and item.get("target_ref")
    ):
        raise SchemaError(f"relationship {oid} missing source_ref/target_ref")
    return StixObject(
        id=oid,
        type=otype,
        name=item.get("name"),
        description=item.get("description"),
        external_references=refs,
        kill_chain_phases=phases,
        source_ref=item.get("source_ref"),
        target_ref=item.get("target_ref"),
        revoked=bool(item.get("revoked", False)),
        deprecated=bool(item.get("x_mitre_deprecated", False)),
        raw=item,
    )


def parse_bundle(raw_json_bytes: bytes | str) -> StixBundle:
    """Parse a STIX 2.0/2.1 JSON bundle into an indexed object set."""
    try:
        if isinstance(raw_json_bytes, bytes):
            raw_json_bytes = raw_json_bytes.decode("utf-8")
        doc = json.loads(raw_json_bytes)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("objects"), list):
        raise SchemaError("bundle has no top-level 'objects' array")
    objects = []
    index: dict = {}
    for item in doc["objects"]:
        obj = _parse_object(item)
        if obj.id in index:
            raise SchemaError(f"duplicate object id: {obj.id}")
        index[obj.id] = obj
        objects.append(obj)
    return StixBundle(objects=tuple(objects), object_index=index)


def serialize_bundle(bundle: StixBundle) -> bytes:
    """Inverse of parse_bundle over the retained raw objects."""
    doc = {"type": "bundle", "objects": [o.raw for o in bundle.objects]}
    return json.dumps(doc, sort_keys=True).encode("utf-8")


@dataclass(frozen=True)
class TechniqueRef:
    id: str
    name: str
    tactics: frozenset[str]


@dataclass(frozen=True)
class TechniqueRegistry:
    """The class space: parent techniques in fixed lexicographic order."""

    techniques: tuple[TechniqueRef, ...]
    by_id: dict
    subtech_parent: dict
    capec_refs: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.techniques)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.techniques)

    def resolve(self, technique_id: str) -> Optional[str]:
        """Map any technique or sub-technique id onto its parent class id."""
        if technique_id in self.by_id:
            return technique_id
        if "." in technique_id:
            parent = self.subtech_parent.get(
                technique_id, technique_id.split(".", 1)[0]
            )
            if parent in self.by_id:
                return parent
        return None

    def index_of(self, technique_id: str) -> int:
        return self.by_id[technique_id]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for t in self.techniques:
            h.update(
                f"{t.id}\t{t.name}\t{','.join(sorted(t.tactics))}\n".encode("utf-8")
            )
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "techniques": [
                {"id": t.id, "name": t.name, "tactics": sorted(t.tactics)}
                for t in self.techniques
            ],
            "subtech_parent": dict(sorted(self.subtech_parent.items())),
            "capec_refs": {k: list(v) for k, v in sorted(self.capec_refs.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TechniqueRegistry":
        techniques = tuple(
            TechniqueRef(id=t["id"], name=t["name"], tactics=frozenset(t["tactics"]))
            for t in d["techniques"]
        )
        return cls(
            techniques=techniques,
            by_id={t.id: i for i, t in enumerate(techniques)},
            subtech_parent=dict(d.get("subtech_parent", {})),
            capec_refs={k: tuple(v) for k, v in d.get("capec_refs", {}).items()},
        )


def save_registry(registry: TechniqueRegistry, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(registry.to_dict(), f, indent=1, sort_keys=True)


def load_registry(path) -> TechniqueRegistry:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return TechniqueRegistry.from_dict(json.load(f))
    except json.JSONDecodeError as exc:
        raise ParseError(f"registry file is not valid JSON: {exc}") from exc
    except KeyError as exc:
        raise SchemaError(f"registry file missing key: {exc}") from exc


def build_registry(bundle: StixBundle) -> TechniqueRegistry:
    """Collect non-revoked parent techniques and the sub-to-parent map."""
    parents: dict = {}
    subs: dict = {}
    capec: dict = {}
    for obj in bundle.by_type("attack-pattern"):
        if obj.revoked or obj.deprecated:
            continue
        tid = obj.attack_external_id()
        if tid is None:
            logger.warning("attack-pattern %s has no T-prefixed external id", obj.id)
            continue
        if "." in tid:
            subs[tid] = tid.split(".", 1)[0]
        else:
            parents[tid] = TechniqueRef(
                id=tid,
                name=obj.name or tid,
                tactics=frozenset(obj.kill_chain_phases),
            )
        refs = obj.capec_ids()
        if refs:
            capec[tid] = refs
    ordered = tuple(parents[tid] for tid in sorted(parents))
    subs = {s: p for s, p in subs.items() if p in parents}
    return TechniqueRegistry(
        techniques=ordered,
        by_id={t.id: i for i, t in enumerate(ordered)},
        subtech_parent=subs,
        capec_refs=capec,
    )


@dataclass(frozen=True)
class RawSample:
    text: str
    technique_id: str
    subtechnique_id: Optional[str]
    technique_name: str
    source_kind: str  # attack_pattern | relationship | capec


@dataclass
class IngestReport:
    counts: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def bump(self, key: str, n: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + n

    def to_dict(self) -> dict:
        return {"counts": dict(sorted(self.counts.items())), "warnings": self.warnings}


def _technique_of(obj: StixObject, registry: TechniqueRegistry):
    """(parent_id, sub_id) of an attack-pattern, or None if unresolvable."""
    tid = obj.attack_external_id()
    if tid is None:
        return None
    parent = registry.resolve(tid)
    if parent is None:
        return None
    return parent, (tid if "." in tid else None)


def extract_samples(
    bundle: StixBundle,
    registry: TechniqueRegistry,
    report: IngestReport | None = None,
) -> list[RawSample]:
    """Technique self-descriptions plus relationship descriptions.

    Order follows the bundle: attack-pattern samples first, then
    relationship samples, so identical input bytes give an identical
    sample list.
    """
    report = report if report is not None else IngestReport()
    samples: list[RawSample] = []
    for obj in bundle.by_type("attack-pattern"):
        if obj.revoked or obj.deprecated:
            continue
        resolved = _technique_of(obj, registry)
        if resolved is None:
            report.bump("attack_patterns_skipped")
            continue
        parent, sub = resolved
        text = (obj.description or "").strip()
        if not text:
            report.bump("attack_patterns_without_description")
            continue
        samples.append(
            RawSample(
                text=text,
                technique_id=parent,
                subtechnique_id=sub,
                technique_name=obj.name or parent,
                source_kind="attack_pattern",
            )
        )
        report.bump("attack_pattern_samples")
    for obj in bundle.by_type("relationship"):
        if obj.revoked or obj.deprecated:
            continue
        text = (obj.description or "").strip()
        if not text:
            report.bump("relationships_without_description")
            continue
        target = bundle.object_index.get(obj.target_ref)
        if target is None or target.type != "attack-pattern":
            report.bump("relationships_non_technique_target")
            continue
        if target.revoked or target.deprecated:
            report.bump("relationships_to_revoked_target")
            continue
        resolved = _technique_of(target, registry)
        if resolved is None:
            report.bump("relationships_target_unresolved")
            continue
        parent, sub = resolved
        samples.append(
            RawSample(
                text=text,
                technique_id=parent,
                subtechnique_id=sub,
                technique_name=target.name or parent,
                source_kind="relationship",
            )
        )
        report.bump("relationship_samples")
    return samples


def enrich_with_capec(
    samples: Iterable[RawSample],
    capec_bundle: StixBundle,
    registry: TechniqueRegistry,
    report: IngestReport | None = None,
) -> list[RawSample]:
    """Append CAPEC descriptions for techniques that reference them."""
    report = report if report is not None else IngestReport()
    by_capec_id: dict = {}
    for obj in capec_bundle.by_type("attack-pattern"):
        for cid in obj.capec_ids():
            by_capec_id.setdefault(cid, obj)
    out = list(samples)
    for tid in sorted(registry.capec_refs):
        parent = registry.resolve(tid)
        if parent is None:
            report.bump("capec_refs_unresolved_technique")
            continue
        for cid in registry.capec_refs[tid]:
            entry = by_capec_id.get(cid)
            if entry is None:
                report.bump("capec_refs_dangling")
                report.warnings.append(f"{tid} references unknown {cid}")
                continue
            text = (entry.description or "").strip()
            if not text:
                report.bump("capec_entries_without_description")
                continue
            out.append(
                RawSample(
                    text=text,
                    technique_id=parent,
                    subtechnique_id=tid if "." in tid else None,
                    technique_name=entry.name or cid,
                    source_kind="capec",
                )
            )
            report.bump("capec_samples")
    return out
