"""Loading and summarizing HASOC-style datasets and ICHCL conversation trees."""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator


class CorpusError(ValueError):
    """Base class for malformed input data."""


class SchemaError(CorpusError):
    pass


class LabelParseError(CorpusError):
    pass


class ValidationError(CorpusError):
    pass


class Scheme(enum.Enum):
    BINARY = "binary"
    FOUR = "four"

    @property
    def classes(self) -> tuple[str, ...]:
        # canonical class order; index == class id everywhere downstream
        return BINARY_CLASSES if self is Scheme.BINARY else FOUR_CLASSES

    @property
    def column(self) -> str:
        return "task_1" if self is Scheme.BINARY else "task_2"

    @property
    def num_classes(self) -> int:
        return len(self.classes)


BINARY_CLASSES = ("NOT", "HOF")
FOUR_CLASSES = ("NONE", "HATE", "OFFN", "PRFN")


class Split(enum.Enum):
    TRAIN = "train"
    TEST = "test"


class Language(enum.Enum):
    ENGLISH = "en"
    HINDI = "hi"
    MARATHI = "mr"
    CODE_MIXED = "mix"


@dataclass(frozen=True)
class Label:
    scheme: Scheme
    value: str

    def __post_init__(self):
        if self.value not in self.scheme.classes:
            raise LabelParseError(
                f"{self.value!r} is not a {self.scheme.value} label; expected one of {self.scheme.classes}"
            )

    @property
    def index(self) -> int:
        return self.scheme.classes.index(self.value)

    @classmethod
    def parse(cls, token: str, scheme: Scheme) -> "Label":
        return cls(scheme, token.strip().upper())

    @classmethod
    def from_index(cls, index: int, scheme: Scheme) -> "Label":
        return cls(scheme, scheme.classes[index])


@dataclass(frozen=True)
class Post:
    id: str
    text: str
    language: Language
    label: Label


@dataclass
class Dataset:
    posts: list[Post]
    scheme: Scheme
    split: Split = Split.TRAIN

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self) -> Iterator[Post]:
        return iter(self.posts)

    @property
    def texts(self) -> list[str]:
        return [p.text for p in self.posts]

    @property
    def targets(self) -> list[int]:
        return [p.label.index for p in self.posts]

    def with_texts(self, texts: list[str]) -> "Dataset":
        """Same posts and labels with replaced text (e.g. after cleaning)."""
        if len(texts) != len(self.posts):
            raise ValueError("text count does not match post count")
        posts = [Post(p.id, t, p.language, p.label) for p, t in zip(self.posts, texts)]
        return Dataset(posts, self.scheme, self.split)


@dataclass(frozen=True)
class ClassCounts:
    labels: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.counts):
            raise ValueError("labels and counts differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError("class counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.labels, self.counts))

    @classmethod
    def from_mapping(cls, mapping: dict[str, int]) -> "ClassCounts":
        return cls(tuple(mapping), tuple(int(v) for v in mapping.values()))


def load_dataset(
    path: str | Path,
    scheme: Scheme = Scheme.BINARY,
    split: Split = Split.TRAIN,
    language: Language = Language.ENGLISH,
) -> Dataset:
    """Read a HASOC TSV (``text_id``, ``text``, ``task_1`` [, ``task_2``]).

    Labels are matched after trimming and uppercasing. Row numbers in error
    messages are 1-based file line numbers, so the first data row is 2.
    """
    path = Path(path)
    required = ["text_id", "text", scheme.column]
    posts: list[Post] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        idx = {name: header.index(name) for name in required}
        for row_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < len(header):
                raise SchemaError(f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}")
            post_id = row[idx["text_id"]].strip()
            text = row[idx["text"]]
            if not post_id:
                raise ValidationError(f"{path}: row {row_no} has an empty text_id")
            if post_id in seen:
                raise ValidationError(f"{path}: duplicate text_id {post_id!r} at row {row_no}")
            if not text.strip():
                raise ValidationError(f"{path}: row {row_no} has empty text")
            try:
                label = Label.parse(row[idx[scheme.column]], scheme)
            except LabelParseError:
                raise LabelParseError(
                    f"{path}: row {row_no}: unknown {scheme.column} label {row[idx[scheme.column]]!r}"
                ) from None
            seen.add(post_id)
            posts.append(Post(post_id, text, language, label))
    return Dataset(posts, scheme, split)


def dataset_stats(d: Dataset) -> ClassCounts:
    counts = [0] * d.scheme.num_classes
    for post in d.posts:
        counts[post.label.index] += 1
    return ClassCounts(d.scheme.classes, tuple(counts))


@dataclass
class ConversationTree:
    id: str
    text: str
    label: Label
    children: list["ConversationTree"] = field(default_factory=list)

    def walk(self) -> Iterator[tuple[list["ConversationTree"], "ConversationTree"]]:
        """Pre-order traversal yielding (ancestors root-first, node)."""
        stack: list[tuple[list[ConversationTree], ConversationTree]] = [([], self)]
        while stack:
            ancestors, node = stack.pop()
            yield ancestors, node
            path = ancestors + [node]
            for child in reversed(node.children):
                stack.append((path, child))

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())


def _parse_record(rec, where: str, seen: set[str], depth: int = 0) -> ConversationTree:
    if not isinstance(rec, dict):
        raise LabelParseError(f"{where}: expected an object, got {type(rec).__name__}")
    for key in ("id", "text", "label"):
        if key not in rec:
            raise LabelParseError(f"{where}: record missing {key!r}")
    node_id = str(rec["id"])
    if node_id in seen:
        raise ValidationError(f"{where}: repeated node id {node_id!r}")
    seen.add(node_id)
    try:
        label = Label.parse(str(rec["label"]), Scheme.BINARY)
    except LabelParseError:
        raise LabelParseError(f"{where}: node {node_id!r} has unknown label {rec['label']!r}") from None
    comments = rec.get("comments") or []
    if not isinstance(comments, list):
        raise LabelParseError(f"{where}: node {node_id!r} 'comments' must be a list")
    children = [_parse_record(c, where, seen, depth + 1) for c in comments]
    return ConversationTree(node_id, str(rec["text"]), label, children)


def load_conversations(path: str | Path) -> list[ConversationTree]:
    """Read an ICHCL-style JSON file: a list of records (or a single record)
    ``{"id", "text", "label", "comments": [...]}``.

    Ids must be unique across the whole file; a JSON document cannot express
    a cycle, so a repeated id is the only way one could be encoded.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: invalid JSON: {exc}") from None
    records = doc if isinstance(doc, list) else [doc]
    seen: set[str] = set()
    return [_parse_record(rec, str(path), seen) for rec in records]


DEFAULT_SEPARATOR = "[CTX]"


def flatten_conversation(
    tree: ConversationTree,
    separator: str = DEFAULT_SEPARATOR,
    language: Language = Language.CODE_MIXED,
) -> list[Post]:
    """One post per node, in pre-order, whose text is the root-to-node path
    joined by `` <separator> ``. Labels stay per node."""
    if not separator:
        raise ValueError("separator must be nonempty")
    joiner = f" {separator} "
    out = []
    for ancestors, node in tree.walk():
        text = joiner.join([a.text for a in ancestors] + [node.text])
        out.append(Post(node.id, text, language, node.label))
    return out


def flatten_conversations(
    trees: list[ConversationTree],
    separator: str = DEFAULT_SEPARATOR,
    split: Split = Split.TRAIN,
) -> Dataset:
    posts = [p for t in trees for p in flatten_conversation(t, separator)]
    return Dataset(posts, Scheme.BINARY, split)
