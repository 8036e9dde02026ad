"""Parser for the PlantUML class-diagram dialect and the syntax oracle.

Supported grammar subset:

* declarations: ``class X``, ``interface X``, ``enum X``, ``abstract X``,
  ``abstract class X``, each with an optional braced member body;
* member lines inside a body: ``[+\\-#~] name : Type`` for attributes and
  ``[+\\-#~] name(p1: T1, ...) : Ret`` for methods (visibility markers are
  parsed and discarded; a member containing ``(`` before any ``:`` is a
  method, otherwise an attribute);
* relationship lines ``Left ["m1"] ARROW ["m2"] Right [: text]`` with the
  arrow table below (text after a colon names the relationship and is
  discarded);
* noise that is skipped: blank lines, line comments starting with ``'``,
  and lines starting with ``skinparam``, ``hide``, ``title``, ``note`` or
  ``end note``; ``@startuml``/``@enduml`` markers are accepted and ignored.

Arrow table (kind, head side).  Stored (source, target) always follows the
arrowhead direction, i.e. source is the tail class and target the head
class; the undirected ``--`` association keeps its left operand as source:

    ``--|>`` / ``<|--``  GE      ``..|>`` / ``<|..``  RE
    ``..>``  / ``<..``   DE      ``--o``  / ``o--``   AG
    ``--*``  / ``*--``   CO      ``-->``  / ``<--`` / ``--``  AS

Classes referenced only in relationships are auto-declared as empty classes
after all explicitly declared ones, in first-reference order.  Duplicate
declarations of the same class merge their members.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (
    Attribute,
    ClassEntity,
    ClassModel,
    Method,
    MultiplicityLabel,
    Parameter,
    Relationship,
    RelationshipKind,
)

START_MARKER = "@startuml"
END_MARKER = "@enduml"


@dataclass
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


@dataclass
class ParseOutcome:
    status: str  # "ok" | "syntax_error"
    model: ClassModel | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ExtractionOutcome:
    status: str  # "found" | "missing_markers"
    code: str = ""

    @property
    def found(self) -> bool:
        return self.status == "found"


def extract_plantuml(raw_output: str) -> ExtractionOutcome:
    """Cut the first ``@startuml`` ... ``@enduml`` block out of raw text.

    The remainder of each marker's own line is excluded.  When several
    complete blocks exist only the first is returned.  Returns
    ``missing_markers`` when either marker is absent or out of order.
    """
    start = raw_output.find(START_MARKER)
    if start < 0:
        return ExtractionOutcome("missing_markers")
    cursor = start + len(START_MARKER)
    end = raw_output.find(END_MARKER, cursor)
    if end < 0:
        return ExtractionOutcome("missing_markers")
    newline = raw_output.find("\n", cursor)
    if newline < 0 or newline > end:
        body = raw_output[cursor:end]
    else:
        body = raw_output[newline + 1 : end]
    return ExtractionOutcome("found", body.strip())


# Longest tokens first so prefixes do not shadow them.
_ARROWS: list[tuple[str, RelationshipKind, bool]] = [
    ("<|--", RelationshipKind.GE, True),
    ("--|>", RelationshipKind.GE, False),
    ("<|..", RelationshipKind.RE, True),
    ("..|>", RelationshipKind.RE, False),
    ("<..", RelationshipKind.DE, True),
    ("..>", RelationshipKind.DE, False),
    ("o--", RelationshipKind.AG, True),
    ("--o", RelationshipKind.AG, False),
    ("*--", RelationshipKind.CO, True),
    ("--*", RelationshipKind.CO, False),
    ("<--", RelationshipKind.AS, True),
    ("-->", RelationshipKind.AS, False),
    ("--", RelationshipKind.AS, False),
]

#: token -> (kind, reversed) for every supported arrow.
ARROW_TABLE: dict[str, tuple[RelationshipKind, bool]] = {
    token: (kind, reverse) for token, kind, reverse in _ARROWS
}

#: canonical right-headed token per kind, used when serializing.
KIND_TO_ARROW: dict[RelationshipKind, str] = {
    RelationshipKind.GE: "--|>",
    RelationshipKind.RE: "..|>",
    RelationshipKind.DE: "..>",
    RelationshipKind.AG: "--o",
    RelationshipKind.CO: "--*",
    RelationshipKind.AS: "-->",
}

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"

_DECL_RE = re.compile(
    rf"^(?P<kw>abstract\s+class|class|interface|enum|abstract)\s+"
    rf"(?P<name>{_NAME})\s*(?P<brace>\{{)?\s*$"
)
_SKIP_RE = re.compile(r"^(skinparam|hide|title|note)\b|^end\s+note\b")
_ARROW_ALTS = "|".join(re.escape(t) for t, _, _ in _ARROWS)
_REL_RE = re.compile(
    rf"^(?P<left>{_NAME})\s*(?:\"(?P<lq>[^\"]*)\")?\s*"
    rf"(?P<arrow>{_ARROW_ALTS})\s*"
    rf"(?:\"(?P<rq>[^\"]*)\")?\s*(?P<right>{_NAME})\s*(?::.*)?$"
)
# Anything shaped like "Name <token> ..." whose token the arrow table rejects.
_REL_SHAPE_RE = re.compile(rf"^(?P<left>{_NAME})\s*(?:\"[^\"]*\")?\s*(?P<arrow>\S+)")
_ARROWISH_RE = re.compile(r"[-.<>|*]")
_METHOD_RE = re.compile(
    rf"^(?P<name>{_NAME})\s*\((?P<params>[^()]*)\)\s*(?::\s*(?P<ret>.+?))?\s*$"
)
_ATTR_RE = re.compile(rf"^(?P<name>{_NAME})\s*(?::\s*(?P<type>.+?))?\s*$")
_PARAM_RE = re.compile(rf"^(?P<name>{_NAME})\s*(?::\s*(?P<type>.+?))?\s*$")

_STEREOTYPE_BY_KEYWORD = {
    "class": "class",
    "interface": "interface",
    "enum": "enum",
    "abstract": "abstract",
    "abstract class": "abstract",
}


class _ClassDraft:
    """Mutable accumulator; duplicate declarations merge into one draft."""

    def __init__(self, name: str, stereotype: str = "class"):
        self.name = name
        self.stereotype = stereotype
        self.attributes: dict[str, Attribute] = {}
        self.methods: dict[tuple[str, int], Method] = {}
        self.explicit = stereotype != ""

    def add_attribute(self, attr: Attribute) -> None:
        self.attributes.setdefault(attr.name, attr)

    def add_method(self, method: Method) -> None:
        self.methods.setdefault((method.name, method.arity), method)

    def build(self) -> ClassEntity:
        return ClassEntity(
            self.name,
            list(self.attributes.values()),
            list(self.methods.values()),
            self.stereotype or "class",
        )


class _Parser:
    def __init__(self) -> None:
        self.drafts: dict[str, _ClassDraft] = {}
        self.order: list[str] = []
        self.auto_order: list[str] = []
        self.relationships: list[Relationship] = []
        self.diagnostics: list[Diagnostic] = []

    def error(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(Diagnostic(line, column, message))

    def declare(self, name: str, stereotype: str) -> _ClassDraft:
        draft = self.drafts.get(name)
        if draft is None:
            draft = _ClassDraft(name, stereotype)
            self.drafts[name] = draft
            self.order.append(name)
        elif not draft.explicit:
            # Promote an auto-declared class to an explicit one in place.
            draft.stereotype = stereotype
            draft.explicit = True
            self.auto_order.remove(name)
            self.order.append(name)
        return draft

    def reference(self, name: str) -> None:
        if name not in self.drafts:
            draft = _ClassDraft(name, "")
            draft.explicit = False
            self.drafts[name] = draft
            self.auto_order.append(name)

    def build(self) -> ClassModel:
        classes = [self.drafts[n].build() for n in self.order]
        classes += [self.drafts[n].build() for n in self.auto_order]
        return ClassModel(classes, self.relationships)


def _parse_member(text: str, line_no: int, column: int, parser: _Parser, draft: _ClassDraft) -> None:
    # Visibility markers carry no meaning for the model.
    stripped = text.lstrip("+-#~").strip()
    if not stripped:
        parser.error(line_no, column, f"malformed member line: {text.strip()!r}")
        return
    colon = stripped.find(":")
    paren = stripped.find("(")
    is_method = paren >= 0 and (colon < 0 or paren < colon)
    if is_method:
        match = _METHOD_RE.match(stripped)
        if not match:
            parser.error(line_no, column, f"malformed member line: {text.strip()!r}")
            return
        params: list[Parameter] = []
        params_text = match.group("params").strip()
        if params_text:
            for part in params_text.split(","):
                pm = _PARAM_RE.match(part.strip())
                if not pm:
                    parser.error(
                        line_no, column, f"malformed parameter: {part.strip()!r}"
                    )
                    return
                params.append(Parameter(pm.group("name"), (pm.group("type") or "").strip()))
        if len({p.name for p in params}) != len(params):
            parser.error(line_no, column, "duplicate parameter name")
            return
        draft.add_method(
            Method(match.group("name"), (match.group("ret") or "").strip(), params)
        )
    else:
        match = _ATTR_RE.match(stripped)
        if not match:
            parser.error(line_no, column, f"malformed member line: {text.strip()!r}")
            return
        draft.add_attribute(Attribute(match.group("name"), (match.group("type") or "").strip()))


def _parse_relationship(line: str, line_no: int, parser: _Parser) -> None:
    if line.count('"') % 2 != 0:
        parser.error(line_no, 1 + line.find('"'), "unbalanced quotes")
        return
    match = _REL_RE.match(line)
    if not match:
        shape = _REL_SHAPE_RE.match(line)
        if (
            shape
            and shape.group("arrow") not in ARROW_TABLE
            and _ARROWISH_RE.search(shape.group("arrow"))
        ):
            parser.error(
                line_no,
                1 + shape.start("arrow"),
                f"unknown arrow token {shape.group('arrow')!r}",
            )
        else:
            parser.error(line_no, 1, f"unrecognized statement: {line.strip()!r}")
        return
    kind, reverse = ARROW_TABLE[match.group("arrow")]
    left, right = match.group("left"), match.group("right")
    left_label = match.group("lq") or ""
    right_label = match.group("rq") or ""
    if reverse:
        source, target = right, left
        label = MultiplicityLabel(right_label, left_label)
    else:
        source, target = left, right
        label = MultiplicityLabel(left_label, right_label)
    parser.reference(source)
    parser.reference(target)
    parser.relationships.append(Relationship(kind, source, target, label))


def parse(code: str) -> ParseOutcome:
    """Parse PlantUML class-diagram code into a :class:`ClassModel`.

    The ``@startuml``/``@enduml`` markers may be present or already
    stripped.  On failure the outcome carries one diagnostic per problem
    found, each with a 1-based line and column.
    """
    parser = _Parser()
    current: _ClassDraft | None = None
    body_opened_at = 0

    for line_no, raw_line in enumerate(code.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("'"):
            continue
        if line.startswith(START_MARKER) or line.startswith(END_MARKER):
            continue
        # Noise lines are only noise outside a class body; inside one, a
        # member may legitimately be named "title" or "note".
        if current is None and _SKIP_RE.match(line):
            continue

        if current is not None:
            closes = line.endswith("}")
            member = line[:-1].strip() if closes else line
            if member == "{":
                parser.error(line_no, 1, "unexpected '{' inside class body")
                member = ""
            if member:
                _parse_member(member, line_no, 1 + raw_line.find(member[0]), parser, current)
            if closes:
                current = None
            continue

        decl = _DECL_RE.match(line)
        if decl:
            keyword = re.sub(r"\s+", " ", decl.group("kw"))
            draft = parser.declare(decl.group("name"), _STEREOTYPE_BY_KEYWORD[keyword])
            if decl.group("brace"):
                current = draft
                body_opened_at = line_no
            continue

        # Declaration with an inline body: "class X { +a : T ... }" or "class X {"
        if "{" in line:
            brace = line.index("{")
            head = _DECL_RE.match(line[:brace].strip() + " {")
            if head:
                keyword = re.sub(r"\s+", " ", head.group("kw"))
                draft = parser.declare(head.group("name"), _STEREOTYPE_BY_KEYWORD[keyword])
                rest = line[brace + 1 :].strip()
                closes = rest.endswith("}")
                if closes:
                    rest = rest[:-1].strip()
                if rest:
                    _parse_member(rest, line_no, 1 + brace + 1, parser, draft)
                if not closes:
                    current = draft
                    body_opened_at = line_no
                continue

        _parse_relationship(line, line_no, parser)

    if current is not None:
        parser.error(body_opened_at, 1, f"unclosed class body for {current.name!r}")

    if parser.diagnostics:
        return ParseOutcome("syntax_error", None, parser.diagnostics)
    return ParseOutcome("ok", parser.build(), [])


def validate(code: str) -> bool:
    """True iff the code parses cleanly; the Pass@k oracle."""
    return parse(code).ok


def _member_lines(entity: ClassEntity) -> list[str]:
    lines = []
    for a in entity.attributes:
        lines.append(f"  {a.name} : {a.type_name}" if a.type_name else f"  {a.name}")
    for m in entity.methods:
        params = ", ".join(
            f"{p.name} : {p.type_name}" if p.type_name else p.name for p in m.params
        )
        suffix = f" : {m.return_type}" if m.return_type else ""
        lines.append(f"  {m.name}({params}){suffix}")
    return lines


def to_plantuml(model: ClassModel) -> str:
    """Serialize a model back to the supported PlantUML subset.

    ``parse(to_plantuml(m))`` reproduces ``m`` structurally.
    """
    keyword = {
        "class": "class",
        "interface": "interface",
        "enum": "enum",
        "abstract": "abstract class",
    }
    lines = [START_MARKER]
    for entity in model.classes:
        members = _member_lines(entity)
        if members:
            lines.append(f"{keyword[entity.stereotype]} {entity.name} {{")
            lines.extend(members)
            lines.append("}")
        else:
            lines.append(f"{keyword[entity.stereotype]} {entity.name}")
    for rel in model.relationships:
        arrow = KIND_TO_ARROW[rel.kind]
        left = f'{rel.source} "{rel.label.from_end}"' if rel.label.from_end else rel.source
        right = f'"{rel.label.to_end}" {rel.target}' if rel.label.to_end else rel.target
        lines.append(f"{left} {arrow} {right}")
    lines.append(END_MARKER)
    return "\n".join(lines) + "\n"
