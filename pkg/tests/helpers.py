from radvar import build_aux_weight, decompose_degeneracy


def setup(spec, params, **kw):
    decomp = decompose_degeneracy(spec, params)
    return decomp, build_aux_weight(decomp, spec, params, **kw)
