import logging

import numpy as np

from houseprice.errors import DatasetError, ParameterError
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)


def split_sizes(n: int, test_fraction: float) -> tuple[int, int]:
    """(n_train, n_test): the train count is n * (1 - test_fraction) rounded half to even.

    Both sides keep at least one row.
    """
    n_train = int(round(n * (1.0 - test_fraction)))
    n_train = min(max(n_train, 1), n - 1)
    return n_train, n - n_train


def train_test_split(dataset: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split; both sides keep the original row order.

    Raises:
        ParameterError: test_fraction outside (0, 1).
        DatasetError: fewer than 2 rows.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ParameterError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = dataset.n_rows
    if n < 2:
        raise DatasetError(f"cannot split {n} row(s) into train and test")
    n_train, n_test = split_sizes(n, test_fraction)
    order = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    logger.debug(f"Split {n} row(s) into {n_train} train / {n_test} test with seed {seed}")
    return dataset.subset(train_idx), dataset.subset(test_idx)
