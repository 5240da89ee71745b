import hashlib
import os
import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from telldraw.cliparts import Flip, N_TYPES, Piece, Scene, Size, is_human

REPO_ROOT = Path(__file__).resolve().parent.parent


def random_piece(rng: random.Random, type_id: int, in_canvas: bool = True) -> Piece:
    span = (0.0, 1.0) if in_canvas else (-0.4, 1.4)
    human = is_human(type_id)
    return Piece(
        type_id=type_id,
        flip=Flip(rng.randrange(2)),
        size=Size(rng.randrange(3)),
        x=rng.uniform(*span),
        y=rng.uniform(*span),
        pose=rng.randrange(7) if human else None,
        expression=rng.randrange(5) if human else None,
    )


def random_scene(
    rng: random.Random, max_pieces: int = 8, min_pieces: int = 0, in_canvas: bool = True
) -> Scene:
    n = rng.randint(min_pieces, max_pieces)
    ids = rng.sample(range(N_TYPES), n)
    return Scene(random_piece(rng, t, in_canvas) for t in ids)


def scene_pair(rng: random.Random, max_pieces: int = 5):
    """Two scenes with overlapping type sets, the shape the metric sees in play."""
    truth = random_scene(rng, max_pieces=max_pieces, min_pieces=1)
    pred_pieces = []
    for p in truth:
        roll = rng.random()
        if roll < 0.2:
            continue  # drawer missed the piece
        if roll < 0.5:
            pred_pieces.append(p)  # exact copy
        else:
            pred_pieces.append(random_piece(rng, p.type_id))
    for t in rng.sample(range(N_TYPES), rng.randint(0, 2)):
        if t not in truth.ids() and all(q.type_id != t for q in pred_pieces):
            pred_pieces.append(random_piece(rng, t))  # spurious extra
    return truth, Scene(pred_pieces)


@st.composite
def piece_st(draw, type_id=None, in_canvas=True):
    tid = draw(st.integers(0, N_TYPES - 1)) if type_id is None else type_id
    lo, hi = (0.0, 1.0) if in_canvas else (-0.5, 1.5)
    coords = st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    human = is_human(tid)
    return Piece(
        type_id=tid,
        flip=Flip(draw(st.integers(0, 1))),
        size=Size(draw(st.integers(0, 2))),
        x=draw(coords),
        y=draw(coords),
        pose=draw(st.integers(0, 6)) if human else None,
        expression=draw(st.integers(0, 4)) if human else None,
    )


@st.composite
def scene_st(draw, max_size=6, min_size=0):
    ids = draw(
        st.lists(
            st.integers(0, N_TYPES - 1),
            min_size=min_size,
            max_size=max_size,
            unique=True,
        )
    )
    return Scene([draw(piece_st(type_id=t)) for t in ids])


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0x5EED)


# --- shared corpora ---------------------------------------------------------
#
# The full-scale corpus takes ~30s to fabricate and import, so it is built
# once and cached under .cache/ keyed by the generator source, unless a real
# release is configured via TELLDRAW_OFFICIAL_DIR (used verbatim, uncached).


def _sim_cache_dir() -> Path:
    import telldraw.simulate as sim

    src = Path(sim.__file__).read_bytes()
    key = hashlib.sha256(src).hexdigest()[:12]
    return REPO_ROOT / ".cache" / f"sim-release-{sim.DEFAULT_SEED}-{key}"


@pytest.fixture(scope="session")
def release_dir() -> Path:
    official = os.environ.get("TELLDRAW_OFFICIAL_DIR")
    if official:
        return Path(official)
    from telldraw.simulate import write_release

    cache = _sim_cache_dir()
    marker = cache / "dialogs.json"
    if not marker.exists():
        cache.mkdir(parents=True, exist_ok=True)
        write_release(cache)
    return cache


@pytest.fixture(scope="session")
def corpus_is_official() -> bool:
    return bool(os.environ.get("TELLDRAW_OFFICIAL_DIR"))


@pytest.fixture(scope="session")
def full_import(release_dir):
    from telldraw.importer import import_official

    return import_official(release_dir)


@pytest.fixture(scope="session")
def full_corpus(full_import):
    return full_import.transcripts


@pytest.fixture(scope="session")
def full_split(full_corpus, full_import):
    from telldraw.splits import split_crosstalk

    return split_crosstalk(
        [t.scene_id for t in full_corpus],
        labels=full_import.split_labels,
        seed=0,
    )


@pytest.fixture(scope="session")
def small_release_dir(tmp_path_factory) -> Path:
    from telldraw.simulate import write_release

    directory = tmp_path_factory.mktemp("small-release")
    write_release(directory, n_dialogs=120, seed=99)
    return directory


@pytest.fixture(scope="session")
def small_corpus(small_release_dir):
    from telldraw.importer import import_official

    return import_official(small_release_dir).transcripts
