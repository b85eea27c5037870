"""Seeded synthetic-corpus generator with ground truth.

Emits the standard ad JSONL format plus a sidecar of per-ad truth (label,
caption-duplicate group, dedup survivor, declared mirror, planted
compliance), a declared-ad archive, and a word2vec-format embedding file
covering the generated vocabulary.

Class vocabularies are disjoint, so a Bayes-optimal text classifier scores
1.0 and trained models can be judged against known rates. Embedding vectors
carry a class-dependent offset on their first coordinate, standing in for
the semantic separation real pre-trained embeddings provide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import AdRecord, format_timestamp
from .textproc import EmbeddingTable, fnv1a64, save_embeddings, tokenize

ELECTION_START = date(2018, 8, 16)
ELECTION_END = date(2018, 10, 28)

POLITICAL_WORDS = """
eleição eleições candidato candidata voto vote votar urna partido campanha
deputado deputada senador senadora governador prefeito vereador presidente
mandato coligação proposta propostas governo política político reforma
justiça direitos cidadania democracia corrupção transparência fiscalização
orçamento saúde educação segurança emprego salário imposto impostos lei
projeto congresso câmara senado bancada eleitor eleitores comício debate
turno legenda federal estadual municipal plano liberdade povo nação pátria
mudança futuro esperança luta trabalhador sindicato aposentadoria
previdência moradia infraestrutura agricultura indústria ciência cultura
""".split()

NON_POLITICAL_WORDS = """
promoção desconto oferta loja compre venda produto produtos sorvete pizza
hambúrguer restaurante cardápio sabor delícia receita moda roupa sapato
tênis bolsa relógio perfume maquiagem cabelo salão academia treino fitness
viagem praia hotel passagem pacote celular smartphone notebook televisão
geladeira móveis sofá decoração jardim cachorro gato ração brinquedo bebê
criança escola curso inglês música violão festa aniversário casamento
presente frete grátis entrega rápida qualidade garantia parcele cartão
cliente atendimento novidade lançamento coleção estoque imperdível aproveite
confira peça sabores tamanhos cores modelos unidades lojas compras
""".split()

# Portuguese function words recognized by the language heuristic; sprinkled
# into every ad so untagged ones still classify as pt.
PT_MARKERS = "não para você isso são também muito essa mais como".split()

SHARED_WORDS = "hoje agora aqui cidade bairro centro brasil gente dia semana".split()

POLITICAL_HASHTAGS = ["#eleicoes2018", "#vote", "#mudabrasil", "#democracia"]
NON_POLITICAL_HASHTAGS = ["#promo", "#oferta", "#novidade", "#imperdivel"]


@dataclass(frozen=True)
class TruthRow:
    id: str
    is_political: bool
    dup_group: str | None = None
    survivor: bool = True
    mirrored: bool = False
    compliant: bool = False

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "is_political": self.is_political,
            "dup_group": self.dup_group,
            "survivor": self.survivor,
            "mirrored": self.mirrored,
            "compliant": self.compliant,
        }


def load_truth(path: str | Path) -> dict[str, TruthRow]:
    rows: dict[str, TruthRow] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            rows[obj["id"]] = TruthRow(
                id=obj["id"],
                is_political=obj["is_political"],
                dup_group=obj.get("dup_group"),
                survivor=obj.get("survivor", True),
                mirrored=obj.get("mirrored", False),
                compliant=obj.get("compliant", False),
            )
    return rows


class _TextFactory:
    """Draws class-conditional ad captions, unique across calls."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.seen: set[str] = set()

    def caption(self, political: bool) -> str:
        pool = POLITICAL_WORDS if political else NON_POLITICAL_WORDS
        hashtags = POLITICAL_HASHTAGS if political else NON_POLITICAL_HASHTAGS
        while True:
            n_content = int(self.rng.integers(6, 15))
            n_markers = int(self.rng.integers(3, 6))
            n_shared = int(self.rng.integers(0, 3))
            words = list(self.rng.choice(pool, size=n_content))
            # distinct draws keep untagged ads classifiable as Portuguese
            # (the heuristic needs >= 2 distinct stopword hits)
            words += list(self.rng.choice(PT_MARKERS, size=n_markers, replace=False))
            if n_shared:
                words += list(self.rng.choice(SHARED_WORDS, size=n_shared))
            self.rng.shuffle(words)
            if self.rng.random() < 0.25:
                words.append(str(self.rng.choice(hashtags)))
            if political and self.rng.random() < 0.3:
                words.append(str(self.rng.integers(10, 100000)))
            if self.rng.random() < 0.1:
                words.append(f"http://exemplo.br/{self.rng.integers(0, 10**9):x}")
            text = " ".join(words).capitalize()
            if text not in self.seen:
                self.seen.add(text)
                return text


def _random_timestamp(rng: np.random.Generator) -> datetime:
    start = datetime.combine(ELECTION_START, datetime.min.time(), tzinfo=timezone.utc)
    span = (ELECTION_END - ELECTION_START).days * 86400
    return start + timedelta(seconds=int(rng.integers(0, span)))


def _cpf_text(rng: np.random.Generator) -> str:
    d = rng.integers(0, 10, size=11)
    return f"CPF {d[0]}{d[1]}{d[2]}.{d[3]}{d[4]}{d[5]}.{d[6]}{d[7]}{d[8]}-{d[9]}{d[10]}"

def _cnpj_text(rng: np.random.Generator) -> str:
    d = rng.integers(0, 10, size=14)
    root = f"{d[0]}{d[1]}.{d[2]}{d[3]}{d[4]}.{d[5]}{d[6]}{d[7]}"
    return f"CNPJ {root}/{d[8]}{d[9]}{d[10]}{d[11]}-{d[12]}{d[13]}"


def _disclaimer(rng: np.random.Generator) -> str:
    keyword = str(rng.choice(["Propaganda Eleitoral", "Propaganda Política", "propaganda eleitoral"]))
    tax = _cpf_text(rng) if rng.random() < 0.5 else _cnpj_text(rng)
    return f"{keyword} - {tax}"


@dataclass
class SynthConfig:
    seed: int = 0
    n_labeled: int = 2000
    n_corpus: int = 40000
    political_rate: float = 0.02
    dup_group_fraction: float = 0.08  # duplicate-caption groups per corpus ad
    political_dup_groups: int = 40
    mirrored_units: int = 60
    compliant_ads: int = 90
    declared_background: int = 2000
    embed_dim: int = 50
    n_advertisers: int = 600


def _token_vector(token: str, seed: int, dim: int, offset: float) -> np.ndarray:
    rng = np.random.default_rng([seed, fnv1a64(token.encode("utf-8"))])
    vec = rng.uniform(-0.5, 0.5, size=dim)
    vec[0] += offset
    return vec


def build_embedding_table(texts: list[str], seed: int, dim: int) -> EmbeddingTable:
    """Seeded random vector per token; the first coordinate is shifted by
    class membership of the word lists so embedding features separate."""
    political = set(POLITICAL_WORDS)
    non_political = set(NON_POLITICAL_WORDS)
    vocab: dict[str, np.ndarray] = {}
    for text in texts:
        for token in tokenize(text):
            if token in vocab:
                continue
            if token in political:
                offset = 0.8
            elif token in non_political:
                offset = -0.8
            else:
                offset = 0.0
            vocab[token] = _token_vector(token, seed, dim, offset)
    return EmbeddingTable(dim=dim, vocab=vocab)


def generate(cfg: SynthConfig, out_dir: str | Path) -> dict:
    """Write the full synthetic fixture into ``out_dir`` and return its
    meta summary (also written as meta.json)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    factory = _TextFactory(rng)

    advertisers = [(f"a{i:04d}", f"Anunciante {i}") for i in range(cfg.n_advertisers)]

    def pick_advertiser() -> tuple[str, str]:
        return advertisers[int(rng.integers(0, len(advertisers)))]

    def make_record(ad_id: str, text: str, source: str, declared: bool,
                    disclaimer: str | None = None,
                    advertiser: tuple[str, str] | None = None) -> AdRecord:
        adv_id, adv_name = advertiser or pick_advertiser()
        first = _random_timestamp(rng)
        last = first + timedelta(days=int(rng.integers(0, 14)))
        language = "pt" if rng.random() < 0.7 else None
        return AdRecord(
            id=ad_id,
            advertiser_id=adv_id,
            advertiser_name=adv_name,
            text=text,
            disclaimer=disclaimer,
            landing_url=None,
            first_seen=first,
            last_seen=last,
            language=language,
            source=source,
            declared_political=declared,
            media_refs=(f"m{rng.integers(0, 10**9):x}",),
        )

    # --- labeled set (balanced): political ads come from the declared
    # archive, non-political ones from the collector, as in a gold standard.
    n_pol_labeled = cfg.n_labeled // 2
    labeled_records: list[AdRecord] = []
    labeled_truth: list[TruthRow] = []
    for i in range(cfg.n_labeled):
        political = i < n_pol_labeled
        ad_id = f"l{i:06d}"
        source = "ad_library" if political else "collector"
        labeled_records.append(
            make_record(ad_id, factory.caption(political), source, political)
        )
        labeled_truth.append(TruthRow(id=ad_id, is_political=political))

    # --- unlabeled corpus: caption-duplicate units, then planted politics.
    n_political = int(round(cfg.n_corpus * cfg.political_rate))
    n_groups = int(cfg.n_corpus * cfg.dup_group_fraction)

    # Unit plan: (members, political). Political groups first, then
    # non-political groups, then singletons filling both class budgets.
    units: list[tuple[int, bool]] = []
    political_budget = n_political
    members_budget = cfg.n_corpus
    for _ in range(min(cfg.political_dup_groups, n_groups)):
        size = int(rng.integers(2, 6))
        if political_budget - size < 0:
            break
        units.append((size, True))
        political_budget -= size
        members_budget -= size
    for _ in range(n_groups - len(units)):
        size = int(rng.integers(2, 6))
        if members_budget - size < political_budget:
            break
        units.append((size, False))
        members_budget -= size
    units.extend((1, True) for _ in range(political_budget))
    members_budget -= political_budget
    units.extend((1, False) for _ in range(members_budget))

    corpus_records: list[AdRecord] = []
    corpus_truth: dict[str, TruthRow] = {}
    unit_infos: list[dict] = []  # caption-unit bookkeeping for mirror/compliance
    counter = 0
    for unit_idx, (size, political) in enumerate(units):
        text = factory.caption(political)
        group_id = f"g{unit_idx:06d}" if size > 1 else None
        advertiser = pick_advertiser()
        members: list[AdRecord] = []
        for _ in range(size):
            ad_id = f"c{counter:06d}"
            counter += 1
            members.append(make_record(ad_id, text, "collector", False, advertiser=advertiser))
        survivor = min(members, key=lambda r: (r.first_seen, r.id))
        corpus_records.extend(members)
        for rec in members:
            corpus_truth[rec.id] = TruthRow(
                id=rec.id,
                is_political=political,
                dup_group=group_id,
                survivor=rec.id == survivor.id,
            )
        unit_infos.append(
            {"text": text, "political": political, "survivor_id": survivor.id}
        )

    # Interleave classes/units so file order carries no signal.
    order = rng.permutation(len(corpus_records))
    corpus_records = [corpus_records[i] for i in order]

    # --- planted compliance: survivors from political units get a legal
    # disclaimer (keyword + tax id).
    political_units = [u for u in unit_infos if u["political"]]
    comp_idx = rng.choice(
        len(political_units), size=min(cfg.compliant_ads, len(political_units)), replace=False
    )
    compliant_ids = {political_units[int(i)]["survivor_id"] for i in comp_idx}

    # --- declared archive: background political ads plus mirrored copies of
    # some planted units (same caption up to case/whitespace jitter).
    mirror_idx = rng.choice(
        len(political_units), size=min(cfg.mirrored_units, len(political_units)), replace=False
    )
    mirrored_units = [political_units[int(i)] for i in mirror_idx]
    mirrored_texts = {u["text"] for u in mirrored_units}

    declared_records: list[AdRecord] = []
    for j in range(cfg.declared_background):
        declared_records.append(
            make_record(f"d{j:06d}", factory.caption(True), "ad_library", True)
        )
    for j, unit in enumerate(mirrored_units):
        text = unit["text"]
        jitter = rng.random()
        if jitter < 0.33:
            text = text.upper()
        elif jitter < 0.66:
            text = "  " + text.replace(" ", "  ") + " "
        declared_records.append(
            make_record(f"dm{j:05d}", text, "ad_library", True)
        )

    mirrored_norms = {_norm(t) for t in mirrored_texts}
    mirrored_ids = {
        rec.id
        for rec in corpus_records
        if corpus_truth[rec.id].is_political and _norm(rec.text) in mirrored_norms
    }

    final_truth = []
    for rec in corpus_records:
        row = corpus_truth[rec.id]
        final_truth.append(
            TruthRow(
                id=row.id,
                is_political=row.is_political,
                dup_group=row.dup_group,
                survivor=row.survivor,
                mirrored=rec.id in mirrored_ids,
                compliant=rec.id in compliant_ids,
            )
        )
    # Attach disclaimers to compliant survivors.
    corpus_records = [
        rec if rec.id not in compliant_ids else _with_disclaimer(rec, _disclaimer(rng))
        for rec in corpus_records
    ]

    # --- embeddings over every token the fixture can produce.
    all_texts = (
        [r.text for r in labeled_records]
        + [r.text for r in corpus_records]
        + [r.text for r in declared_records]
    )
    table = build_embedding_table(all_texts, cfg.seed, cfg.embed_dim)

    _write_jsonl(out / "labeled.jsonl", (r.to_json_obj() for r in labeled_records))
    _write_jsonl(out / "labeled_truth.jsonl", (t.to_json_obj() for t in labeled_truth))
    _write_jsonl(out / "corpus.jsonl", (r.to_json_obj() for r in corpus_records))
    _write_jsonl(out / "corpus_truth.jsonl", (t.to_json_obj() for t in final_truth))
    _write_jsonl(out / "declared.jsonl", (r.to_json_obj() for r in declared_records))
    with open(out / "embeddings.txt", "w", encoding="utf-8") as fh:
        save_embeddings(table, fh)

    survivors = sum(1 for t in final_truth if t.survivor)
    meta = {
        "seed": cfg.seed,
        "n_labeled": cfg.n_labeled,
        "n_corpus": cfg.n_corpus,
        "n_political": n_political,
        "dup_groups": sum(1 for s, _ in units if s > 1),
        "survivors": survivors,
        "political_survivors": sum(1 for t in final_truth if t.survivor and t.is_political),
        "mirrored_units": len(mirrored_units),
        "compliant_ads": len(compliant_ids),
        "declared_ads": len(declared_records),
        "embed_dim": cfg.embed_dim,
        "vocab_size": len(table),
        "period": [ELECTION_START.isoformat(), ELECTION_END.isoformat()],
        "generated_files": [
            "labeled.jsonl",
            "labeled_truth.jsonl",
            "corpus.jsonl",
            "corpus_truth.jsonl",
            "declared.jsonl",
            "embeddings.txt",
        ],
    }
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return meta


def _norm(text: str) -> str:
    from .normalize import normalize_text

    return normalize_text(text)


def _with_disclaimer(rec: AdRecord, disclaimer: str) -> AdRecord:
    from dataclasses import replace

    return replace(rec, disclaimer=disclaimer)


def _write_jsonl(path: Path, objs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_labeled(ads_path: str | Path, truth_path: str | Path) -> tuple[list[str], list[int]]:
    """Convenience loader pairing ad texts with sidecar labels."""
    from .corpus import ingest_path

    store = ingest_path(str(ads_path))
    truth = load_truth(truth_path)
    texts: list[str] = []
    labels: list[int] = []
    for rec in store:
        row = truth.get(rec.id)
        if row is None:
            raise ValueError(f"ad {rec.id} missing from truth sidecar")
        texts.append(rec.text)
        labels.append(1 if row.is_political else 0)
    return texts, labels
