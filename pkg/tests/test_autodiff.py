"""Per-op gradient checks against central finite differences."""

import numpy as np
import pytest

from magpilot.policy import autodiff as ad


def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        hi = f()
        x[i] = old - h
        lo = f()
        x[i] = old
        g[i] = (hi - lo) / (2 * h)
        it.iternext()
    return g


def check_op(build, *shapes, seed=0, tol=1e-7):
    """build(tensors) -> scalar Tensor; checks every input's gradient."""
    rng = np.random.default_rng(seed)
    arrays = [rng.normal(0, 1.0, s) for s in shapes]
    tensors = [ad.param(a) for a in arrays]
    out = build(*tensors)
    out.backward()
    for t, arr in zip(tensors, arrays):
        def f(t=t):
            return build(*tensors).item()
        ng = numeric_grad(f, t.data)
        assert np.allclose(t.grad, ng, atol=tol, rtol=1e-5), \
            f"max err {np.abs(t.grad - ng).max()}"


def test_add_mul_broadcast():
    check_op(lambda a, b: ad.reduce_sum(ad.mul(ad.add(a, b), a)), (3, 4), (4,))
    check_op(lambda a, b: ad.reduce_sum(ad.mul(a, b)), (2, 3, 4), (3, 1))


def test_sub_scale():
    check_op(lambda a, b: ad.reduce_sum(ad.scale(ad.sub(a, b), 2.5)), (5,), (5,))


def test_matmul_plain_and_batched():
    check_op(lambda a, b: ad.reduce_sum(ad.matmul(a, b)), (3, 4), (4, 2))
    check_op(lambda a, b: ad.reduce_sum(ad.matmul(a, b)), (2, 3, 5, 4), (2, 3, 4, 2))
    # broadcast: shared weight across batch
    check_op(lambda a, b: ad.reduce_sum(ad.matmul(a, b)), (6, 3, 4), (4, 2))


def test_transpose_reshape_concat():
    weights = ad.tensor(np.arange(24.0).reshape(3, 2, 4))
    check_op(lambda a: ad.reduce_sum(ad.mul(ad.transpose(a, (1, 0, 2)),
                                            weights)), (2, 3, 4))
    check_op(lambda a: ad.reduce_sum(ad.mul(ad.reshape(a, (6, 2)),
                                            ad.reshape(a, (6, 2)))), (3, 4))
    check_op(lambda a, b: ad.reduce_sum(ad.mul(ad.concat([a, b], axis=1),
                                               ad.concat([a, b], axis=1))),
             (2, 3), (2, 2))


def test_take():
    idx = np.array([0, 2, 2, 1])
    check_op(lambda a: ad.reduce_sum(ad.mul(ad.take(a, idx), ad.take(a, idx))),
             (3, 4))


def test_broadcast_to():
    check_op(lambda a: ad.reduce_sum(ad.mul(ad.broadcast_to(a, (5, 2, 3)),
                                            ad.broadcast_to(a, (5, 2, 3)))),
             (1, 2, 3))


def test_reductions():
    check_op(lambda a: ad.reduce_sum(ad.mul(ad.reduce_mean(a, axis=1),
                                            ad.reduce_mean(a, axis=1))), (3, 5))
    check_op(lambda a: ad.reduce_mean(ad.mul(a, a)), (4, 3))
    check_op(lambda a: ad.reduce_sum(ad.reduce_sum(a, axis=0, keepdims=True)),
             (3, 4))


def test_softmax():
    check_op(lambda a: ad.reduce_sum(
        ad.mul(ad.softmax(a, axis=-1),
               ad.tensor(np.arange(12.0).reshape(3, 4)))), (3, 4))


def test_gelu():
    check_op(lambda a: ad.reduce_sum(ad.gelu(a)), (4, 5))


def test_layernorm():
    check_op(lambda x, g, b: ad.reduce_sum(
        ad.mul(ad.layernorm(x, g, b), ad.tensor(np.arange(8.0).reshape(2, 4)))),
        (2, 4), (4,), (4,))


def test_smooth_l1_values_and_grad():
    # analytic values at the contract points
    assert ad.smooth_l1_mean(ad.tensor([0.5]), ad.tensor([0.0])).item() == \
        pytest.approx(0.125)
    assert ad.smooth_l1_mean(ad.tensor([2.0]), ad.tensor([0.0])).item() == \
        pytest.approx(1.5)
    assert ad.smooth_l1_mean(ad.tensor([1.0]), ad.tensor([0.0])).item() == \
        pytest.approx(0.5)  # continuous at the transition
    # gradient (nudged away from the |e| = beta kink)
    check_op(lambda p, t: ad.smooth_l1_mean(p, t, beta=0.37), (4, 3), (4, 3),
             seed=3)


def test_smooth_l1_shape_mismatch():
    with pytest.raises(ValueError):
        ad.smooth_l1_mean(ad.tensor(np.zeros((2, 3))), ad.tensor(np.zeros((3, 2))))


def test_cross_entropy_values_and_grad():
    # uniform logits over 2 classes -> ln 2
    logits = ad.tensor(np.zeros((4, 2)))
    assert ad.cross_entropy_mean(logits, np.array([0, 1, 0, 1])).item() == \
        pytest.approx(np.log(2.0))
    labels = np.array([0, 2, 1])
    check_op(lambda l: ad.cross_entropy_mean(l, labels), (3, 4))


def test_cross_entropy_label_validation():
    with pytest.raises(ValueError):
        ad.cross_entropy_mean(ad.tensor(np.zeros((2, 2))), np.array([0, 2]))


def test_backward_requires_scalar():
    with pytest.raises(ValueError):
        ad.param(np.zeros(3)).backward()


def test_grad_accumulates_over_reuse():
    a = ad.param(np.array(2.0).reshape(()))
    b = ad.reduce_sum(ad.mul(a, a))  # d/da = 2a = 4
    b.backward()
    assert a.grad == pytest.approx(4.0)
