"""Class-diagram value types and their canonical JSON document form.

A diagram is a flat set of classes (each with attributes and methods) plus
typed, directed relationships between declared classes.  Declaration order
is preserved everywhere because class index positions feed the relationship
similarity computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class ModelError(ValueError):
    """A structural rule of the diagram model was violated."""


class DocumentError(ValueError):
    """A canonical document could not be read.

    ``line``/``column`` are populated for JSON syntax problems; schema
    problems carry a field path in the message instead.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class RelationshipKind(Enum):
    """The six supported relationship types."""

    AS = "AS"  # association
    AG = "AG"  # aggregation
    CO = "CO"  # composition
    DE = "DE"  # dependency
    GE = "GE"  # generalization
    RE = "RE"  # realization


STEREOTYPES = ("class", "interface", "abstract", "enum")


@dataclass
class Attribute:
    name: str
    type_name: str = ""

    def validate(self) -> None:
        if not self.name.strip():
            raise ModelError("attribute name must be non-empty")


@dataclass
class Parameter:
    name: str
    type_name: str = ""

    def validate(self) -> None:
        if not self.name.strip():
            raise ModelError("parameter name must be non-empty")


@dataclass
class Method:
    name: str
    return_type: str = ""
    params: list[Parameter] = field(default_factory=list)

    @property
    def arity(self) -> int:
        return len(self.params)

    def validate(self) -> None:
        if not self.name.strip():
            raise ModelError("method name must be non-empty")
        seen = set()
        for p in self.params:
            p.validate()
            if p.name in seen:
                raise ModelError(
                    f"method {self.name!r}: duplicate parameter name {p.name!r}"
                )
            seen.add(p.name)


@dataclass
class ClassEntity:
    name: str
    attributes: list[Attribute] = field(default_factory=list)
    methods: list[Method] = field(default_factory=list)
    stereotype: str = "class"

    def validate(self) -> None:
        if not self.name.strip():
            raise ModelError("class name must be non-empty")
        if self.stereotype not in STEREOTYPES:
            raise ModelError(
                f"class {self.name!r}: unknown stereotype {self.stereotype!r}"
            )
        seen_attrs = set()
        for a in self.attributes:
            a.validate()
            if a.name in seen_attrs:
                raise ModelError(
                    f"class {self.name!r}: duplicate attribute name {a.name!r}"
                )
            seen_attrs.add(a.name)
        seen_methods = set()
        for m in self.methods:
            m.validate()
            key = (m.name, m.arity)
            if key in seen_methods:
                raise ModelError(
                    f"class {self.name!r}: duplicate method {m.name!r}/{m.arity}"
                )
            seen_methods.add(key)


@dataclass
class MultiplicityLabel:
    from_end: str = ""
    to_end: str = ""


@dataclass
class Relationship:
    kind: RelationshipKind
    source: str
    target: str
    label: MultiplicityLabel = field(default_factory=MultiplicityLabel)


@dataclass
class ClassModel:
    classes: list[ClassEntity] = field(default_factory=list)
    relationships: list[Relationship] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        names = set()
        for c in self.classes:
            c.validate()
            if c.name in names:
                raise ModelError(f"duplicate class name {c.name!r}")
            names.add(c.name)
        for r in self.relationships:
            for endpoint in (r.source, r.target):
                if endpoint not in names:
                    raise ModelError(
                        f"relationship endpoint {endpoint!r} does not name a declared class"
                    )

    def class_index(self) -> dict[str, int]:
        """Name -> declaration-order position."""
        return {c.name: i for i, c in enumerate(self.classes)}


@dataclass
class ModelStats:
    class_count: int
    avg_attributes_per_class: float
    avg_methods_per_class: float
    relationship_count: int


def model_stats(model: ClassModel) -> ModelStats:
    """Size metrics of a model; per-class averages are 0 for an empty model."""
    n = len(model.classes)
    if n == 0:
        return ModelStats(0, 0.0, 0.0, len(model.relationships))
    return ModelStats(
        class_count=n,
        avg_attributes_per_class=sum(len(c.attributes) for c in model.classes) / n,
        avg_methods_per_class=sum(len(c.methods) for c in model.classes) / n,
        relationship_count=len(model.relationships),
    )


# ---------------------------------------------------------------------------
# Canonical document form.
#
# One top-level object with "classes" and "relationships" arrays.  Field
# names follow the model: attributes are {name, type}, methods are
# {name, return_type, params}, relationships are {r_type, c_begin, c_end,
# label} with the multiplicity label stored as two strings {from, to}.
# Serialization is deterministic: declaration order, fixed key order,
# 2-space indentation, one trailing newline.
# ---------------------------------------------------------------------------


def to_canonical_document(model: ClassModel) -> str:
    doc = {
        "classes": [
            {
                "name": c.name,
                "stereotype": c.stereotype,
                "attributes": [
                    {"name": a.name, "type": a.type_name} for a in c.attributes
                ],
                "methods": [
                    {
                        "name": m.name,
                        "return_type": m.return_type,
                        "params": [
                            {"name": p.name, "type": p.type_name} for p in m.params
                        ],
                    }
                    for m in c.methods
                ],
            }
            for c in model.classes
        ],
        "relationships": [
            {
                "r_type": r.kind.value,
                "c_begin": r.source,
                "c_end": r.target,
                "label": {"from": r.label.from_end, "to": r.label.to_end},
            }
            for r in model.relationships
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _require(obj: dict, key: str, types, where: str):
    if key not in obj:
        raise DocumentError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, types):
        raise DocumentError(f"{where}: field {key!r} has wrong type")
    return value


def from_canonical_document(doc: str) -> ClassModel:
    """Inverse of :func:`to_canonical_document`.

    Raises :class:`DocumentError` for malformed JSON or schema violations and
    :class:`ModelError` for structural rule violations (duplicate class
    names, dangling relationship endpoints).
    """
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"malformed document: {exc.msg} (line {exc.lineno}, column {exc.colno})",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(data, dict):
        raise DocumentError("document root must be an object")

    classes = []
    for i, raw in enumerate(_require(data, "classes", list, "document")):
        where = f"classes[{i}]"
        if not isinstance(raw, dict):
            raise DocumentError(f"{where}: must be an object")
        name = _require(raw, "name", str, where)
        stereotype = raw.get("stereotype", "class")
        if not isinstance(stereotype, str):
            raise DocumentError(f"{where}: field 'stereotype' has wrong type")
        attributes = []
        for j, a in enumerate(raw.get("attributes", [])):
            aw = f"{where}.attributes[{j}]"
            if not isinstance(a, dict):
                raise DocumentError(f"{aw}: must be an object")
            attributes.append(
                Attribute(_require(a, "name", str, aw), a.get("type", "") or "")
            )
        methods = []
        for j, m in enumerate(raw.get("methods", [])):
            mw = f"{where}.methods[{j}]"
            if not isinstance(m, dict):
                raise DocumentError(f"{mw}: must be an object")
            params = []
            for p_idx, p in enumerate(m.get("params", [])):
                pw = f"{mw}.params[{p_idx}]"
                if not isinstance(p, dict):
                    raise DocumentError(f"{pw}: must be an object")
                params.append(
                    Parameter(_require(p, "name", str, pw), p.get("type", "") or "")
                )
            methods.append(
                Method(
                    _require(m, "name", str, mw),
                    m.get("return_type", "") or "",
                    params,
                )
            )
        classes.append(ClassEntity(name, attributes, methods, stereotype))

    relationships = []
    for i, raw in enumerate(_require(data, "relationships", list, "document")):
        where = f"relationships[{i}]"
        if not isinstance(raw, dict):
            raise DocumentError(f"{where}: must be an object")
        kind_text = _require(raw, "r_type", str, where)
        try:
            kind = RelationshipKind(kind_text)
        except ValueError:
            raise DocumentError(
                f"{where}: unknown relationship type {kind_text!r}"
            ) from None
        label_raw = raw.get("label", {})
        if not isinstance(label_raw, dict):
            raise DocumentError(f"{where}: field 'label' has wrong type")
        label = MultiplicityLabel(
            str(label_raw.get("from", "") or ""), str(label_raw.get("to", "") or "")
        )
        relationships.append(
            Relationship(
                kind,
                _require(raw, "c_begin", str, where),
                _require(raw, "c_end", str, where),
                label,
            )
        )

    return ClassModel(classes, relationships)
