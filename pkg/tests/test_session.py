import copy
import json

import numpy as np
import pytest

from dvx.errors import DvxError
from dvx.sampler import SamplerWeights, diversify_full_ranking, relevance_ranking
from dvx.session import (
    SessionConfig,
    ToolKind,
    back,
    choose,
    export_log,
    replay_log,
    see_more,
    start_session,
    top,
)
from synthcorpus import blob_corpus, corpus_from_arrays, nested_blob_corpus


@pytest.fixture(scope="module")
def corpus():
    return blob_corpus(n=120, d=32, blobs=4, seed=17, spread=0.1)


@pytest.fixture(scope="module")
def nested():
    corpus, _ = nested_blob_corpus(seed=17)
    return corpus


def _cfg(tool, **kw):
    return SessionConfig(tool=tool, **kw)


def test_scroll_start_equals_relevance_ranking(corpus):
    state = start_session(corpus, _cfg(ToolKind.SCROLL))
    assert state.grid == relevance_ranking(corpus)
    assert not state.can_see_more


def test_scroll_div_start_equals_diversified_ranking(corpus):
    cfg = _cfg(ToolKind.SCROLL_DIV)
    state = start_session(corpus, cfg)
    assert state.grid == diversify_full_ranking(corpus, cfg.weights)


def test_clustering_start_shows_root_fan_out(corpus):
    state = start_session(corpus, _cfg(ToolKind.CLUSTERING))
    assert 3 <= len(state.grid) <= 16
    assert state.can_see_more


def test_diverxplorer_start_grid(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    assert len(state.grid) == 16
    root = int(np.argmax(corpus.relevance.scores))
    assert state.frame.root == root
    assert state.grid[0] == root  # rerank keeps the root in front
    assert state.step == 1 and state.can_see_more and not state.can_back


def test_diverxplorer_grid_too_large_for_dimension():
    small = corpus_from_arrays(np.random.default_rng(0).normal(size=(40, 8)))
    with pytest.raises(DvxError) as err:
        start_session(small, _cfg(ToolKind.DIVERXPLORER, k=16))
    assert err.value.code == "BAD_CONFIG"


def test_see_more_on_scroll_rejected(corpus):
    state = start_session(corpus, _cfg(ToolKind.SCROLL))
    with pytest.raises(DvxError) as err:
        see_more(state, state.grid[0])
    assert err.value.code == "NOT_STEPWISE_TOOL"


def test_see_more_walk_and_step_limit(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    for expected_step in (2, 3, 4):
        see_more(state, [i for i in state.grid if i != state.frame.root][0])
        assert state.step == expected_step
    with pytest.raises(DvxError) as err:
        see_more(state, state.grid[1])
    assert err.value.code == "STEP_LIMIT"


def test_see_more_selection_must_be_displayed(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    not_shown = next(i for i in range(corpus.n) if i not in state.grid)
    with pytest.raises(DvxError) as err:
        see_more(state, not_shown)
    assert err.value.code == "SELECTION_NOT_IN_GRID"


def test_prior_roots_never_reappear(nested):
    scores = nested.relevance.scores
    state = start_session(nested, _cfg(ToolKind.DIVERXPLORER))
    roots = [state.frame.root]
    for _ in range(3):
        pick = min(
            (i for i in state.grid if i != state.frame.root),
            key=lambda m: (-scores[m], m),
        )
        see_more(state, pick)
        for r in roots:  # all roots from earlier steps stay hidden
            assert r not in state.grid
        roots.append(state.frame.root)


def test_diversity_decay_step_one_to_two(nested):
    # any valid selection at step 1 may only tighten the step-2 sample
    wins = 0
    state0 = start_session(nested, _cfg(ToolKind.DIVERXPLORER))
    first = state0.frame.subset_logdet
    candidates = [i for i in state0.grid if i != state0.frame.root]
    rng = np.random.default_rng(5)
    for _ in range(100):
        state = start_session(nested, _cfg(ToolKind.DIVERXPLORER))
        pick = candidates[rng.integers(0, len(candidates))]
        see_more(state, pick)
        if state.frame.subset_logdet <= first + 1e-9:
            wins += 1
    assert wins >= 95


def test_choose_terminal_flow(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    choose(state, state.grid[3])
    assert state.status == "chosen" and state.chosen_image == state.grid[3]
    with pytest.raises(DvxError) as err:
        choose(state, state.grid[2])
    assert err.value.code == "ALREADY_CHOSEN"
    with pytest.raises(DvxError):
        back(state)
    with pytest.raises(DvxError):
        top(state)
    with pytest.raises(DvxError):
        see_more(state, state.grid[1])


def test_choose_rejects_hidden_image(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    hidden = next(i for i in range(corpus.n) if i not in state.grid)
    with pytest.raises(DvxError) as err:
        choose(state, hidden)
    assert err.value.code == "SELECTION_NOT_IN_GRID"


def test_choose_on_scroll_accepts_any_listed_image(corpus):
    state = start_session(corpus, _cfg(ToolKind.SCROLL))
    choose(state, int(state.grid[-1]))
    assert state.status == "chosen"


def test_back_restores_previous_grid_exactly(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    grid1 = state.grid
    see_more(state, state.grid[1] if state.grid[1] != state.frame.root else state.grid[2])
    grid2 = state.grid
    see_more(state, [i for i in state.grid if i != state.frame.root][0])
    back(state)
    assert state.grid == grid2
    back(state)
    assert state.grid == grid1
    with pytest.raises(DvxError) as err:
        back(state)
    assert err.value.code == "AT_FIRST_STEP"


def test_top_resets_to_initial_grid(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    grid1 = state.grid
    for _ in range(3):
        see_more(state, [i for i in state.grid if i != state.frame.root][0])
    top(state)
    assert state.step == 1 and state.grid == grid1
    top(state)  # idempotent at step 1
    assert state.grid == grid1


def test_clustering_descends_to_leaf_then_stops(corpus):
    state = start_session(corpus, _cfg(ToolKind.CLUSTERING))
    guard = 0
    while state.can_see_more:
        see_more(state, state.grid[0])
        guard += 1
        assert guard <= 6
    with pytest.raises(DvxError) as err:
        see_more(state, state.grid[0])
    assert err.value.code == "STEP_LIMIT"


def test_export_log_fresh_session(corpus):
    state = start_session(corpus, _cfg(ToolKind.SCROLL))
    log = export_log(state)
    assert [e["type"] for e in log["events"]] == ["start"]
    assert log["tool"] == "scroll"


def test_export_log_ends_with_choose(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    see_more(state, [i for i in state.grid if i != state.frame.root][0])
    choose(state, state.grid[5])
    log = export_log(state)
    assert log["events"][-1]["type"] == "choose"
    assert log["status"] == "chosen"


def test_replay_reproduces_grids(nested):
    rng = np.random.default_rng(23)
    state = start_session(nested, _cfg(ToolKind.DIVERXPLORER))
    for _ in range(2):
        others = [i for i in state.grid if i != state.frame.root]
        see_more(state, int(others[rng.integers(0, len(others))]))
    back(state)
    top(state)
    see_more(state, [i for i in state.grid if i != state.frame.root][3])
    choose(state, state.grid[2])
    log = json.loads(json.dumps(export_log(state)))  # round-trip like the wire
    replayed = replay_log(nested, log)
    assert replayed.grid == state.grid
    assert replayed.chosen_image == state.chosen_image


def test_replay_detects_divergence(corpus):
    state = start_session(corpus, _cfg(ToolKind.DIVERXPLORER))
    log = copy.deepcopy(export_log(state))
    log["events"][0]["grid"][0] = int(log["events"][0]["grid"][1])
    with pytest.raises(DvxError) as err:
        replay_log(corpus, log)
    assert err.value.code == "REPLAY_MISMATCH"
