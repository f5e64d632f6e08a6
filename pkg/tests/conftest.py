import numpy as np
import pytest

from zsaudio.scores import ScoreMatrix


def make_matrix(ll, golds=None, *, task_id="toy", model_id="m0", prompt_id="p0",
                class_names=None, utt_ids=None):
    ll = np.asarray(ll, dtype=np.float64)
    n, k = ll.shape
    if class_names is None:
        class_names = tuple(f"c{i}" for i in range(k))
    if utt_ids is None:
        utt_ids = tuple(f"u{i:04d}" for i in range(n))
    if golds is None:
        golds = (None,) * n
    return ScoreMatrix(
        task_id=task_id,
        model_id=model_id,
        prompt_id=prompt_id,
        class_names=tuple(class_names),
        utt_ids=tuple(utt_ids),
        golds=tuple(golds),
        ll=ll,
    )


@pytest.fixture
def toy_matrix():
    return make_matrix(
        np.log([[0.2, 0.1, 0.1], [0.1, 0.1, 0.2], [0.3, 0.3, 0.3]]),
        golds=(0, 2, 1),
    )
