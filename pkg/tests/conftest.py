import os

from hypothesis import HealthCheck, settings, strategies as st

from fieldbv import terms as T

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def ff_terms(p=7, names=("x", "y"), max_leaves=8):
    F = T.FF(p)
    leaves = st.one_of(st.sampled_from([T.var(n, F) for n in names]),
                       st.integers(0, p - 1).map(lambda v: T.const(v, F)))

    def grow(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: T.add(*ab)),
            st.tuples(children, children).map(lambda ab: T.mul(*ab)),
            st.tuples(children, children).map(lambda ab: T.sub(*ab)),
        )

    return st.recursive(leaves, grow, max_leaves=max_leaves)


def nat_terms(names=("a", "b"), max_leaves=8):
    leaves = st.one_of(st.sampled_from([T.var(n, T.NAT) for n in names]),
                       st.integers(0, 9).map(T.nat))

    def grow(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: T.add(*ab)),
            st.tuples(children, children).map(lambda ab: T.mul(*ab)),
            st.tuples(children, children).map(lambda ab: T.sub(*ab)),
            st.tuples(children, children).map(lambda ab: T.mod(*ab)),
        )

    return st.recursive(leaves, grow, max_leaves=max_leaves)
