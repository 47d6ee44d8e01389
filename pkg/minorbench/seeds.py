"""Seed derivation shared by every randomized component.

A derived seed is the first 8 bytes of a BLAKE2b digest over the base seed and
the job keys, joined with ``:``. Floats are written with ``repr`` so that
``0.1`` always hashes the same way. The result does not depend on iteration
order or on which worker runs the job.
"""
import hashlib


def derive_seed(base_seed, *keys):
    text = ":".join([str(int(base_seed))] + [repr(k) for k in keys])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
