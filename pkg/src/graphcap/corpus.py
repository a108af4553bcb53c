"""Caption text machinery: tokenization, object-token extraction, synonym
grouping into concept classes, and the caption vocabulary."""

from collections import Counter
from dataclasses import dataclass

from .errors import ValidationError

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = [PAD, BOS, EOS, UNK]

# Spare synonym mappings shipped alongside the generator's lexicon; generated
# captions always use canonical tokens, so these only matter for external data.
DEFAULT_SYNONYMS = {
    "box": "square",
    "disc": "circle",
    "wedge": "triangle",
    "guy": "man",
    "kid": "child",
}


def tokenize(text):
    return text.lower().split()


def extract_object_tokens(caption, noun_lexicon):
    """Tokens of ``caption`` present in ``noun_lexicon``, order and duplicates kept."""
    if not noun_lexicon:
        raise ValidationError("noun lexicon is empty")
    lex = set(noun_lexicon)
    return [tok for tok in caption if tok in lex]


def canonicalize(token, synonym_table):
    return synonym_table.get(token, token)


def normalize_synonym_table(table):
    """Path-compress member->canonical chains so one application is idempotent."""
    out = {}
    for member, canon in table.items():
        seen = {member}
        while canon in table and canon not in seen:
            seen.add(canon)
            canon = table[canon]
        out[member] = canon
    return out


def load_synonym_table(path):
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            member, canon = line.split("\t")
            table[member] = canon
    return normalize_synonym_table(table)


def save_synonym_table(path, table):
    with open(path, "w", encoding="utf-8") as fh:
        for member in sorted(table):
            fh.write(f"{member}\t{table[member]}\n")


@dataclass(frozen=True)
class ConceptClass:
    class_id: int
    canonical: str
    members: tuple
    frequency: int


class ConceptClassTable:
    """Top-K synonym groups over object tokens, ordered by descending corpus
    frequency with lexicographic tie-break."""

    def __init__(self, classes):
        self.classes = list(classes)
        self._by_token = {}
        for cls in self.classes:
            for member in cls.members:
                if member in self._by_token:
                    raise ValidationError(f"token {member!r} in two concept classes")
                self._by_token[member] = cls

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def class_of(self, token):
        return self._by_token.get(token)

    def canonical_names(self):
        return [cls.canonical for cls in self.classes]

    def to_json(self):
        return {
            "classes": [
                {
                    "id": c.class_id,
                    "canonical": c.canonical,
                    "members": list(c.members),
                    "frequency": c.frequency,
                }
                for c in self.classes
            ]
        }

    @classmethod
    def from_json(cls, doc):
        return cls(
            ConceptClass(c["id"], c["canonical"], tuple(c["members"]), c["frequency"])
            for c in doc["classes"]
        )


def build_concept_classes(captions, noun_lexicon, synonym_table, k):
    """Count canonicalized object tokens over all captions and keep the top-k
    groups (descending frequency, ties lexicographic on canonical token)."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    table = normalize_synonym_table(synonym_table)
    counts = Counter()
    for caption in captions:
        for tok in extract_object_tokens(caption, noun_lexicon):
            counts[canonicalize(tok, table)] += 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    classes = []
    for class_id, (canon, freq) in enumerate(ordered):
        members = {canon} | {m for m, c in table.items() if c == canon}
        classes.append(ConceptClass(class_id, canon, tuple(sorted(members)), freq))
    return ConceptClassTable(classes)


class Vocabulary:
    """Token ids with pad=0, bos=1, eos=2, unk=3 and contiguous content ids."""

    def __init__(self, tokens):
        self.id_to_token = list(SPECIALS) + [t for t in tokens if t not in SPECIALS]
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        self.pad_id, self.bos_id, self.eos_id, self.unk_id = (
            self.token_to_id[s] for s in SPECIALS
        )

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def encode(self, tokens, max_len=None):
        """[bos] + ids + [eos], padded with pad to ``max_len`` if given."""
        ids = [self.bos_id]
        ids += [self.token_to_id.get(t, self.unk_id) for t in tokens]
        ids.append(self.eos_id)
        if max_len is not None:
            if len(ids) > max_len:
                ids = ids[: max_len - 1] + [self.eos_id]
            ids += [self.pad_id] * (max_len - len(ids))
        return ids

    def decode(self, ids):
        out = []
        for i in ids:
            if i == self.eos_id:
                break
            if i in (self.pad_id, self.bos_id):
                continue
            out.append(self.id_to_token[i])
        return out

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self.id_to_token:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
        if tokens[:4] != SPECIALS:
            raise ValidationError(f"vocabulary file must start with {SPECIALS}")
        return cls(tokens[4:])


def build_vocab(captions, min_count=1):
    """Vocabulary over tokens with corpus frequency >= min_count, ordered by
    descending frequency then lexicographically."""
    if min_count < 1:
        raise ValidationError("min_count must be >= 1")
    captions = list(captions)
    if not captions:
        raise ValidationError("empty caption corpus")
    counts = Counter(tok for cap in captions for tok in cap)
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(kept)
