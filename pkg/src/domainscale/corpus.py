"""Annotated manifesto corpus: parsing, validation, indexing and slicing.

A corpus is a flat list of party-attributed sentences, optionally carrying a
fine-grained category code. Heading records (code ``"H"``) mark section titles
and are dropped at ingestion; the ``"0"`` code marks content outside any
policy category and is kept. Within one party the sentence order is defined by
the ``position`` field, not by file order, so shuffled exports stay valid.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import CorpusParseError, UnknownKeyError, ValidationError

HEADING_CODE = "H"
OTHER_LABEL = "other"

_DATE_RE = re.compile(r"^\d{4}-\d{2}$")


@dataclass(frozen=True)
class Sentence:
    """One annotated (or unannotated) manifesto sentence."""

    id: str
    party: str
    election_date: str  # "YYYY-MM"
    position: int
    text: str
    code: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("sentence id must be non-empty")
        if any(ch.isspace() for ch in self.id):
            # ids become tokens in whitespace-separated embedding rows
            raise ValidationError(f"sentence id {self.id!r} contains whitespace")
        if not self.party:
            raise ValidationError(f"sentence {self.id!r}: party must be non-empty")
        if not _DATE_RE.match(self.election_date) or not (
            1 <= int(self.election_date[5:7]) <= 12
        ):
            raise ValidationError(
                f"sentence {self.id!r}: election_date {self.election_date!r} "
                "is not of the form YYYY-MM"
            )
        if not isinstance(self.position, int) or self.position < 0:
            raise ValidationError(
                f"sentence {self.id!r}: position must be a nonnegative integer"
            )
        if not self.text or not self.text.strip():
            raise ValidationError(f"sentence {self.id!r}: text must be non-empty")
        if self.code == HEADING_CODE:
            raise ValidationError(
                f"sentence {self.id!r}: heading records are dropped at ingestion "
                "and cannot be part of a corpus"
            )


class Corpus:
    """Immutable, indexed collection of sentences.

    Sentences are kept sorted by (party, election_date, position); per-party
    and per-code indexes are consistent projections of that list.
    """

    def __init__(self, sentences: list[Sentence]):
        ordered = sorted(sentences, key=lambda s: (s.party, s.election_date, s.position))

        seen_ids: set[str] = set()
        seen_slots: set[tuple[str, str, int]] = set()
        for s in ordered:
            if s.id in seen_ids:
                raise ValidationError(f"duplicate sentence id {s.id!r}")
            seen_ids.add(s.id)
            slot = (s.party, s.election_date, s.position)
            if slot in seen_slots:
                raise ValidationError(
                    f"duplicate (party, election_date, position) = {slot!r}"
                )
            seen_slots.add(slot)

        self._sentences = ordered
        self._by_id = {s.id: s for s in ordered}
        self._by_party: dict[str, list[Sentence]] = {}
        self._by_code: dict[str, set[str]] = {}
        for s in ordered:
            self._by_party.setdefault(s.party, []).append(s)
            if s.code is not None:
                self._by_code.setdefault(s.code, set()).add(s.id)

    @property
    def sentences(self) -> list[Sentence]:
        return list(self._sentences)

    def __len__(self) -> int:
        return len(self._sentences)

    def __iter__(self):
        return iter(self._sentences)

    def sentence(self, sid: str) -> Sentence:
        try:
            return self._by_id[sid]
        except KeyError:
            raise UnknownKeyError(f"unknown sentence id {sid!r}") from None

    def __contains__(self, sid: str) -> bool:
        return sid in self._by_id

    def parties(self) -> list[str]:
        return sorted(self._by_party)

    def party_sentences(self, party: str) -> list[Sentence]:
        try:
            return list(self._by_party[party])
        except KeyError:
            raise UnknownKeyError(f"unknown party {party!r}") from None

    def code_ids(self, code: str) -> set[str]:
        return set(self._by_code.get(code, set()))

    def codes(self) -> list[str]:
        return sorted(self._by_code)

    def manifestos(self) -> list[tuple[tuple[str, str], list[Sentence]]]:
        """Sentences grouped by (party, election_date), in sorted order."""
        groups: dict[tuple[str, str], list[Sentence]] = {}
        for s in self._sentences:
            groups.setdefault((s.party, s.election_date), []).append(s)
        return sorted(groups.items())


def _sentence_from_record(rec: dict, line: int) -> Sentence:
    required = ("id", "party", "election_date", "position", "text")
    for field in required:
        if field not in rec or rec[field] is None:
            raise CorpusParseError(f"missing field {field!r}", line)
    position = rec["position"]
    if isinstance(position, bool) or not isinstance(position, int):
        raise CorpusParseError("field 'position' must be an integer", line)
    code = rec.get("code")
    if code is not None and not isinstance(code, str):
        raise CorpusParseError("field 'code' must be a string or null", line)
    try:
        return Sentence(
            id=str(rec["id"]),
            party=str(rec["party"]),
            election_date=str(rec["election_date"]),
            position=position,
            text=str(rec["text"]),
            code=code,
        )
    except ValidationError as exc:
        raise CorpusParseError(str(exc), line) from None


def _read_jsonl(path: Path) -> list[Sentence]:
    out = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON ({exc.msg})", line_no) from None
            if not isinstance(rec, dict):
                raise CorpusParseError("record is not a JSON object", line_no)
            if rec.get("code") == HEADING_CODE:
                continue  # headings are titles, not content
            out.append(_sentence_from_record(rec, line_no))
    return out


def _read_csv(path: Path) -> list[Sentence]:
    out = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for line_no, row in enumerate(reader, start=2):
            rec = dict(row)
            if rec.get("code") in ("", None):
                rec["code"] = None
            if rec.get("code") == HEADING_CODE:
                continue
            try:
                rec["position"] = int(rec.get("position", ""))
            except (TypeError, ValueError):
                raise CorpusParseError("field 'position' must be an integer", line_no) from None
            out.append(_sentence_from_record(rec, line_no))
    return out


def ingest_corpus(path: str | Path, fmt: str = "jsonl") -> Corpus:
    """Read, validate and index a corpus file.

    Heading records (code == "H") are dropped before any uniqueness check;
    sentences coded "0" are retained. ``fmt`` is "jsonl" or "csv".
    """
    if fmt not in ("jsonl", "csv"):
        raise ValidationError(f"unknown corpus format {fmt!r}")
    path = Path(path)
    if not path.exists():
        raise CorpusParseError(f"no such file: {path}")
    records = _read_jsonl(path) if fmt == "jsonl" else _read_csv(path)
    return Corpus(records)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Serialize to JSON Lines in canonical sentence order."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for s in corpus:
            rec = {
                "id": s.id,
                "party": s.party,
                "election_date": s.election_date,
                "position": s.position,
                "text": s.text,
                "code": s.code,
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


class DomainScheme:
    """Mapping from fine-grained category codes to named policy domains.

    Codes are disjoint across domains; ``other_codes`` holds codes that do not
    represent any policy domain and always contains the "0" code.
    """

    def __init__(self, domains: dict[str, set[str]], other_codes: set[str] = frozenset()):
        clean: dict[str, frozenset[str]] = {}
        assigned: dict[str, str] = {}
        for name, codes in domains.items():
            if not name:
                raise ValidationError("domain names must be non-empty")
            if name in clean:
                raise ValidationError(f"duplicate domain name {name!r}")
            if name == OTHER_LABEL:
                raise ValidationError(f"{OTHER_LABEL!r} is reserved for non-domain codes")
            for code in codes:
                if code in assigned:
                    raise ValidationError(
                        f"code {code!r} assigned to both {assigned[code]!r} and {name!r}"
                    )
                assigned[code] = name
            clean[name] = frozenset(codes)
        other = frozenset(other_codes) | {"0"}
        overlap = set(assigned) & other
        if overlap:
            raise ValidationError(
                f"codes {sorted(overlap)!r} are both in a domain and in other_codes"
            )
        self._domains = clean
        self._other = other
        self._assigned = assigned

    def domains(self) -> dict[str, frozenset[str]]:
        return dict(self._domains)

    @property
    def other_codes(self) -> frozenset[str]:
        return self._other

    def domain_names(self) -> list[str]:
        return list(self._domains)

    def domain_of(self, code: str) -> str | None:
        """Domain name for a code, or None if the code is not in any domain."""
        return self._assigned.get(code)

    def label_of(self, code: str) -> str:
        """Domain name, or "other" for codes outside every domain."""
        return self._assigned.get(code, OTHER_LABEL)

    @classmethod
    def load(cls, path: str | Path) -> "DomainScheme":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusParseError(f"scheme file is not valid JSON: {exc.msg}") from None
        if not isinstance(raw, dict) or "domains" not in raw:
            raise ValidationError("scheme file must be an object with a 'domains' key")
        domains = {name: set(codes) for name, codes in raw["domains"].items()}
        other = set(raw.get("other", []))
        return cls(domains, other)

    def save(self, path: str | Path) -> None:
        obj = {
            "domains": {name: sorted(codes) for name, codes in self._domains.items()},
            "other": sorted(self._other),
        }
        Path(path).write_text(
            json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


def slice_by_domain(corpus: Corpus, scheme: DomainScheme, party: str) -> dict[str, set[str]]:
    """Partition one party's sentences into per-domain id sets.

    Every domain of the scheme appears in the result, possibly with an empty
    set. Sentences that are uncoded or whose code falls outside all domains
    are not part of any returned set.
    """
    slices: dict[str, set[str]] = {name: set() for name in scheme.domain_names()}
    for s in corpus.party_sentences(party):
        if s.code is None:
            continue
        domain = scheme.domain_of(s.code)
        if domain is not None:
            slices[domain].add(s.id)
    return slices


def category_counts(corpus: Corpus) -> dict[str, int]:
    """Occurrences of every category code over all coded sentences."""
    counts = Counter(s.code for s in corpus if s.code is not None)
    return dict(counts)
