import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from benchmark import synthetic_closure_input
from union_find import UnionFind, array_congruence_closure


def test_union_reports_merges():
    uf = UnionFind(range(4))
    assert uf.union(0, 1)
    assert uf.union(2, 3)
    assert not uf.union(1, 0)
    assert uf.union(1, 3)
    assert uf.connected(0, 2)
    assert uf.class_count() == 1


def test_groups_follow_given_order():
    uf = UnionFind("abcd")
    uf.union("d", "b")
    assert uf.groups("abcd") == [["a"], ["b", "d"], ["c"]]


def test_find_registers_new_elements():
    uf = UnionFind()
    assert uf.find("x") == "x"
    assert uf.class_count() == 1


def worklist_closure(maps: list[np.ndarray], pairs: np.ndarray, size: int) -> list[list[int]]:
    uf = UnionFind(range(size))
    work = [(int(a), int(b)) for a, b in pairs]
    while work:
        a, b = work.pop()
        if uf.union(a, b):
            work.extend((int(f[a]), int(f[b])) for f in maps)
    return sorted(sorted(g) for g in uf.groups(range(size)))


def label_groups(labels: np.ndarray) -> list[list[int]]:
    groups = {}
    for x, label in enumerate(labels.tolist()):
        groups.setdefault(label, []).append(x)
    return sorted(groups.values())


@settings(max_examples=200, deadline=None)
@given(size=st.integers(1, 40), morphisms=st.integers(0, 3), pairs=st.integers(0, 6), seed=st.integers(0, 10**6))
def test_array_kernel_matches_worklist_closure(size, morphisms, pairs, seed):
    maps, seed_pairs = synthetic_closure_input(size, morphisms, pairs, seed)
    result = array_congruence_closure(maps, seed_pairs, size=size)
    assert label_groups(result.labels) == worklist_closure(maps, seed_pairs, size)
    # labels are the least element of each class
    assert all(result.labels[x] <= x for x in range(size))
    assert result.merges == size - result.final_classes


def test_array_kernel_without_maps_is_plain_union():
    result = array_congruence_closure([], np.array([[0, 3], [3, 5]]), size=6)
    assert result.labels.tolist() == [0, 1, 2, 0, 4, 0]
    assert result.final_classes == 4
    assert result.merges == 2


def test_array_kernel_counts_each_absorbed_root_once():
    # three pairs share the root 3 in the first sweep, then 1 and 2 join 0
    result = array_congruence_closure([], np.array([[0, 3], [1, 3], [2, 3], [0, 3]]), size=4)
    assert result.labels.tolist() == [0, 0, 0, 0]
    assert result.merges == 3
    assert result.final_classes == 1


def test_array_kernel_infers_size():
    f = np.array([1, 1, 2])
    result = array_congruence_closure([f], np.array([[0, 2]]))
    assert result.initial_classes == 3
    # 0~2 forces f(0)=1 ~ f(2)=2
    assert result.final_classes == 1


def test_million_element_accounting():
    elements = 10**6
    maps, seed_pairs = synthetic_closure_input(elements, 10, 500_000, seed=0)
    result = array_congruence_closure(maps, seed_pairs, size=elements)
    assert result.initial_classes == elements
    assert result.merges == result.initial_classes - result.final_classes
    assert result.final_classes == int(np.count_nonzero(result.labels == np.arange(elements)))
