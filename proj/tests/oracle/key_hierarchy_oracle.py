#!/usr/bin/env python3
"""Independent recomputation of the key hierarchy.

Reads the line-delimited dump written by `nrsim vectors` and recomputes every
output from the recorded inputs with hashlib/hmac and the `cryptography`
package's X25519. Exits 1 on the first mismatching field list, 0 otherwise.

    key_hierarchy_oracle.py check vectors.jsonl
    key_hierarchy_oracle.py fixed          # prints the pinned unit-test values
"""

import argparse
import hashlib
import hmac
import json
import sys

from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives import serialization

SQN_WINDOW = 1 << 28


def encode(label, parts):
    out = bytes([len(label)]) + label.encode()
    for p in parts:
        out += len(p).to_bytes(2, "big") + p
    return out


def prf(key, label, parts):
    return hmac.new(key, encode(label, parts), hashlib.sha256).digest()


def be(n, width):
    return n.to_bytes(width, "big")


def anonymity_key(k, rand):
    return prf(k, "AK", [rand])[:6]


def mac(k, sqn, rand, amf):
    return prf(k, "MAC", [be(sqn, 6), rand, be(amf, 2)])[:8]


def f_res(k, rand):
    return prf(k, "RES", [rand])[:16]


def f_ck(k, rand):
    return prf(k, "CK", [rand])[:16]


def f_ik(k, rand):
    return prf(k, "IK", [rand])[:16]


def res_star(res, ck, ik, sn):
    return prf(ck + ik, "RES*", [sn.encode(), res])[:16]


def hash_response(r, rand):
    return hashlib.sha256(encode("HRES*", [rand, r])).digest()[:16]


def k_ausf(ck, ik, sn):
    return prf(ck + ik, "K_AUSF", [sn.encode()])


def k_seaf(ka, sn):
    return prf(ka, "K_SEAF", [sn.encode()])


def k_amf(ks, plmn, msin):
    return prf(ks, "K_AMF", [("imsi-" + plmn + msin).encode()])


def nas_keys(kamf):
    return prf(kamf, "NAS-ENC", [])[:16], prf(kamf, "NAS-INT", [])[:16]


def as_keys(kgnb):
    return prf(kgnb, "RRC-ENC", [])[:16], prf(kgnb, "RRC-INT", [])[:16]


def k_gnb(kamf, gnb_id, freq):
    return prf(kamf, "K_GNB", [be(gnb_id, 4), be(freq, 4)])


def k_gnb_star(kgnb, target, nhcc):
    return prf(kgnb, "K_GNB*", [be(target, 4), be(nhcc, 4)])


def autn(k, sqn, rand, amf):
    ak = int.from_bytes(anonymity_key(k, rand), "big")
    return be(sqn ^ ak, 6) + be(amf, 2) + mac(k, sqn, rand, amf)


def verify(k, sqn_ue, rand, autn_bytes):
    concealed = int.from_bytes(autn_bytes[:6], "big")
    amf = int.from_bytes(autn_bytes[6:8], "big")
    sqn = concealed ^ int.from_bytes(anonymity_key(k, rand), "big")
    if not hmac.compare_digest(mac(k, sqn, rand, amf), autn_bytes[8:16]):
        return "mac_failure"
    if not (sqn_ue < sqn <= sqn_ue + SQN_WINDOW):
        return "sync_failure"
    return "ok"


def raw_public(priv):
    return priv.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def conceal(plmn, msin, home_public, ephemeral):
    eph = X25519PrivateKey.from_private_bytes(ephemeral)
    eph_pub = raw_public(eph)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(home_public))
    plain = msin.encode()
    stream = b""
    ctr = 0
    while len(stream) < len(plain):
        stream += prf(shared, "SUCI-ENC", [eph_pub, be(ctr, 4)])
        ctr += 1
    ct = bytes(a ^ b for a, b in zip(plain, stream))
    tag = prf(shared, "SUCI-MAC", [plmn.encode(), eph_pub, ct])[:8]
    return eph_pub + ct + tag


def deconceal(plmn, suci, home_private):
    eph_pub, ct, tag = suci[:32], suci[32:-8], suci[-8:]
    shared = X25519PrivateKey.from_private_bytes(home_private).exchange(X25519PublicKey.from_public_bytes(eph_pub))
    if not hmac.compare_digest(prf(shared, "SUCI-MAC", [plmn.encode(), eph_pub, ct])[:8], tag):
        return None
    stream = b""
    ctr = 0
    while len(stream) < len(ct):
        stream += prf(shared, "SUCI-ENC", [eph_pub, be(ctr, 4)])
        ctr += 1
    return bytes(a ^ b for a, b in zip(ct, stream)).decode()


def tss_tag(secret, pci, slot, bits):
    d = prf(secret, "TSS", [be(pci, 2), be(slot, 8)])
    out = bytearray(d[: (bits + 7) // 8])
    if bits % 8:
        out[-1] &= (0xFF << (8 - bits % 8)) & 0xFF
    return bytes(out)


def expected(i):
    h = bytes.fromhex
    k, rand, sn = h(i["k"]), h(i["rand"]), i["sn_name"]
    sqn, amf = i["sqn"], i["amf_field"]
    res, ck, ik = f_res(k, rand), f_ck(k, rand), f_ik(k, rand)
    xres = res_star(res, ck, ik, sn)
    ka = k_ausf(ck, ik, sn)
    ks = k_seaf(ka, sn)
    kamf = k_amf(ks, i["supi_plmn"], i["supi_msin"])
    nas_enc, nas_int = nas_keys(kamf)
    kg = k_gnb(kamf, i["gnb_id"], i["freq"])
    rrc_enc, rrc_int = as_keys(kg)
    kstar = k_gnb_star(kg, i["target_gnb_id"], i["nhcc"])
    rrc_enc_s, rrc_int_s = as_keys(kstar)
    home = X25519PrivateKey.from_private_bytes(h(i["home_private"]))
    home_pub = raw_public(home)
    suci = conceal(i["supi_plmn"], i["supi_msin"], home_pub, h(i["ephemeral"]))
    a = autn(k, sqn, rand, amf)
    tampered = bytearray(a)
    tampered[8] ^= 0x01
    return {
        "ak": anonymity_key(k, rand).hex(),
        "autn": a.hex(),
        "res": res.hex(),
        "ck": ck.hex(),
        "ik": ik.hex(),
        "xres_star": xres.hex(),
        "res_star": xres.hex(),
        "hxres_star": hash_response(xres, rand).hex(),
        "k_ausf": ka.hex(),
        "k_seaf": ks.hex(),
        "k_amf": kamf.hex(),
        "nas_enc": nas_enc.hex(),
        "nas_int": nas_int.hex(),
        "k_gnb": kg.hex(),
        "rrc_enc": rrc_enc.hex(),
        "rrc_int": rrc_int.hex(),
        "k_gnb_star": kstar.hex(),
        "rrc_enc_star": rrc_enc_s.hex(),
        "rrc_int_star": rrc_int_s.hex(),
        "home_public": home_pub.hex(),
        "suci": suci.hex(),
        "suci_roundtrip": deconceal(i["supi_plmn"], suci, h(i["home_private"])) == i["supi_msin"],
        "verify_fresh": verify(k, sqn - 1, rand, a),
        "verify_replay": verify(k, sqn, rand, a),
        "verify_tampered": verify(k, sqn - 1, rand, bytes(tampered)),
        "tss_tag": tss_tag(h(i["tss_secret"]), i["pci"], i["slot"], i["tag_bits"]).hex(),
    }


def check(path):
    total = bad = 0
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            want = expected(rec["input"])
            got = rec["output"]
            diff = sorted(k for k in set(want) | set(got) if want.get(k) != got.get(k))
            total += 1
            if diff:
                bad += 1
                if bad <= 5:
                    print(f"mismatch seed={rec['seed']} index={rec['index']}: {', '.join(diff)}")
    print(f"{total} vectors, {bad} mismatches")
    return 0 if total and not bad else 1


def fixed():
    """Values pinned in the C++ unit tests."""
    k = bytes(range(32))
    rand = bytes(range(0xA0, 0xB0))
    sn = "testnet"
    res, ck, ik = f_res(k, rand), f_ck(k, rand), f_ik(k, rand)
    xres = res_star(res, ck, ik, sn)
    ka = k_ausf(ck, ik, sn)
    ks = k_seaf(ka, sn)
    kamf = k_amf(ks, "00101", "0000000001")
    kamf_other = k_amf(ks, "00101", "0000000002")
    kg = k_gnb(kamf, 0x1001, 632628)
    flipped = bytearray(xres)
    flipped[15] ^= 0x01
    home_priv = bytes([0x11] * 32)
    home_pub = raw_public(X25519PrivateKey.from_private_bytes(home_priv))
    suci = conceal("00101", "0000000001", home_pub, bytes([0x22] * 32))
    out = {
        "autn_sqn7": autn(k, 7, rand, 0x8000).hex(),
        "xres_star": xres.hex(),
        "res": res.hex(),
        "hxres_star": hash_response(xres, rand).hex(),
        "hxres_star_flipped": hash_response(bytes(flipped), rand).hex(),
        "k_ausf": ka.hex(),
        "k_seaf": ks.hex(),
        "k_amf": kamf.hex(),
        "k_amf_other_supi": kamf_other.hex(),
        "k_gnb": kg.hex(),
        "k_gnb_other_gnb": k_gnb(kamf, 0x1002, 632628).hex(),
        "k_gnb_other_freq": k_gnb(kamf, 0x1001, 632640).hex(),
        "k_gnb_star_nhcc0": k_gnb_star(kg, 0x1002, 0).hex(),
        "k_gnb_star_nhcc1": k_gnb_star(kg, 0x1002, 1).hex(),
        "suci": suci.hex(),
        "tss_tag_64": tss_tag(bytes([0x33] * 32), 101, 5, 64).hex(),
        "tss_tag_20": tss_tag(bytes([0x33] * 32), 101, 5, 20).hex(),
    }
    for name, value in out.items():
        print(f"{name} = {value}")
    return 0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    c = sub.add_parser("check")
    c.add_argument("dump")
    sub.add_parser("fixed")
    args = ap.parse_args()
    return check(args.dump) if args.cmd == "check" else fixed()


if __name__ == "__main__":
    sys.exit(main())
