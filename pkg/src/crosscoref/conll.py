"""CoNLL-2012 column format import/export.

Only used for interop with existing scorers; the JSONL schema is the
canonical format (CoNLL cannot carry flags, speaker mentions, or
empty placeholder utterances). The coreference column uses the usual
open/close parenthesis notation: "(3" opens cluster 3, "3)" closes it,
"(3)" is a single-token mention, multiple entries join with "|".
Close brackets match the most recent open bracket of the same cluster
id, so nesting and crossing across distinct clusters round-trip; two
crossing spans of the *same* cluster are not representable (a known
limitation of the format itself).
"""

from __future__ import annotations

import re
from typing import Sequence

from .core import (
    Clustering,
    CorefError,
    Document,
    Mention,
    MentionKind,
    Utterance,
    build_clusters,
)

_BEGIN_RE = re.compile(r"#begin document \((?P<id>.*)\); part (?P<part>\d+)")
_COREF_PART_RE = re.compile(r"^(\((\d+)\)|\((\d+)|(\d+)\))$")


class ConllError(CorefError):
    """Malformed CoNLL input; carries the offending row number."""

    def __init__(self, message: str, path=None, line_no: int | None = None):
        self.path = path
        self.line_no = line_no
        where = f"{path}:{line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")


def coref_column(doc: Document, clustering: Clustering) -> list[list[str]]:
    """Per-utterance, per-token coreference cells ("-" when unannotated)."""
    by_id = doc.mentions_by_id()
    cluster_ids: dict[str, int] = {}
    for number, cluster in enumerate(clustering.clusters):
        for mid in cluster:
            cluster_ids[mid] = number

    opens: dict[tuple[int, int], list[tuple[int, int]]] = {}
    closes: dict[tuple[int, int], list[tuple[int, int]]] = {}
    singles: dict[tuple[int, int], list[int]] = {}
    for mid, number in cluster_ids.items():
        mention = by_id.get(mid)
        if mention is None or mention.kind is not MentionKind.SPAN:
            continue
        utt, start, end = mention.span()
        if end - start == 1:
            singles.setdefault((utt, start), []).append(number)
        else:
            opens.setdefault((utt, start), []).append((end, number))
            closes.setdefault((utt, end - 1), []).append((start, number))

    cells = []
    for utt_index, utt in enumerate(doc.utterances):
        row = []
        for tok_index in range(len(utt.tokens)):
            parts = []
            # closes precede opens so a bracket never pops a span that
            # only opened at this very token; longer spans open first
            for start, number in sorted(closes.get((utt_index, tok_index), ()),
                                        key=lambda p: -p[0]):
                parts.append(f"{number})")
            for end, number in sorted(opens.get((utt_index, tok_index), ()),
                                      key=lambda p: -p[0]):
                parts.append(f"({number}")
            for number in sorted(singles.get((utt_index, tok_index), ())):
                parts.append(f"({number})")
            row.append("|".join(parts) if parts else "-")
        cells.append(row)
    return cells


def write_conll(docs: Sequence[Document], clusterings: Sequence[Clustering],
                path) -> None:
    """Write documents with their clusterings in CoNLL-2012 columns.

    Emits the standard 12 columns (pos/parse/lemma/frameset/sense/NER
    filled with placeholders), speaker in column 10, coreference last.
    Speaker mentions and empty utterances have no CoNLL representation
    and are skipped.
    """
    if len(docs) != len(clusterings):
        raise ConllError("need one clustering per document")
    with open(path, "w", encoding="utf-8") as handle:
        for doc, clustering in zip(docs, clusterings):
            cells = coref_column(doc, clustering)
            handle.write(f"#begin document ({doc.doc_id}); part 000\n")
            for utt_index, utt in enumerate(doc.utterances):
                if not utt.tokens:
                    continue
                speaker = utt.speaker or "-"
                for tok_index, token in enumerate(utt.tokens):
                    row = [doc.doc_id, "0", str(tok_index), token,
                           "-", "*", "-", "-", "-", speaker, "*",
                           cells[utt_index][tok_index]]
                    handle.write("\t".join(row) + "\n")
                handle.write("\n")
            handle.write("#end document\n")


def read_conll(path) -> list[tuple[Document, Clustering]]:
    """Read CoNLL documents along with the clustering they encode."""
    out = []
    doc_id = None
    utterances: list[Utterance] = []
    tokens: list[str] = []
    speaker = ""
    spans: dict[int, list[tuple[int, int, int]]] = {}
    open_stacks: dict[int, list[tuple[int, int, int]]] = {}

    def finish_sentence():
        nonlocal tokens, speaker
        if tokens:
            utterances.append(Utterance(speaker=speaker if speaker != "-" else "",
                                        tokens=tuple(tokens)))
        tokens = []
        speaker = ""

    def finish_document(line_no):
        nonlocal doc_id, utterances, spans, open_stacks
        finish_sentence()
        for stacks in open_stacks.values():
            if stacks:
                raise ConllError(
                    f"unbalanced coreference brackets in document {doc_id!r}",
                    path, line_no)
        mentions = []
        clusters = []
        counter = 0
        for cid in sorted(spans):
            members = []
            previous = None
            for utt, start, end in sorted(spans[cid]):
                mid = f"c{cid}_{counter}"
                counter += 1
                ants = (previous,) if previous is not None else ()
                mentions.append(Mention(id=mid, kind=MentionKind.SPAN,
                                        utt_index=utt, start=start, end=end,
                                        antecedents=ants))
                members.append(mid)
                previous = mid
            clusters.append(frozenset(members))
        doc = Document(doc_id=doc_id or "", language="",
                       utterances=tuple(utterances),
                       mentions=tuple(sorted(mentions,
                                             key=lambda m: m.span())))
        out.append((doc, Clustering.from_sets(clusters)))
        doc_id = None
        utterances = []
        spans = {}
        open_stacks = {}

    line_no = 0
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if line.startswith("#begin document"):
                match = _BEGIN_RE.match(line)
                if not match:
                    raise ConllError("malformed #begin line", path, line_no)
                doc_id = match.group("id")
                continue
            if line.startswith("#end document"):
                finish_document(line_no)
                continue
            if not line.strip():
                finish_sentence()
                continue
            if doc_id is None:
                raise ConllError("token row outside a document", path, line_no)
            cols = line.split()
            if len(cols) < 3:
                raise ConllError("too few columns", path, line_no)
            word = cols[3] if len(cols) > 3 else cols[1]
            speaker = cols[9] if len(cols) >= 12 else ""
            tok_index = len(tokens)
            tokens.append(word)
            utt_index = len(utterances)

            coref = cols[-1]
            if coref != "-":
                for part in coref.split("|"):
                    match = _COREF_PART_RE.match(part)
                    if not match:
                        raise ConllError(f"bad coreference field {part!r}",
                                         path, line_no)
                    single, opened, closed = match.group(2, 3, 4)
                    if single is not None:
                        spans.setdefault(int(single), []).append(
                            (utt_index, tok_index, tok_index + 1))
                    elif opened is not None:
                        open_stacks.setdefault(int(opened), []).append(
                            (utt_index, tok_index, line_no))
                    else:
                        cid = int(closed)
                        stack = open_stacks.get(cid)
                        if not stack:
                            raise ConllError(
                                f"close bracket without open for cluster {cid}",
                                path, line_no)
                        o_utt, o_tok, _ = stack.pop()
                        if o_utt != utt_index:
                            raise ConllError(
                                f"cluster {cid} span crosses a sentence "
                                "boundary", path, line_no)
                        spans.setdefault(cid, []).append(
                            (utt_index, o_tok, tok_index + 1))
    if doc_id is not None:
        raise ConllError("missing #end document", path, line_no)
    return out


def read_conll_skeleton(path) -> list[Document]:
    """Documents only; the clustering stays recoverable via build_clusters
    because mentions of one cluster are chained by antecedent links."""
    return [doc for doc, _ in read_conll(path)]


def conll_clustering(doc: Document) -> Clustering:
    """Clustering encoded by a document read from CoNLL."""
    return build_clusters(doc)
