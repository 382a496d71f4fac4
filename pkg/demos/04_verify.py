"""
Exhaustive check over small circuits
====================================

Every single-input circuit with up to two free-clocked registers,
every latch pattern.
"""

import time

from refform.verify import enumerate_mcd_circuits, verify_lemma, verify_theorem

print(sum(1 for _ in enumerate_mcd_circuits(2)), "circuits with two registers")

start = time.perf_counter()
report = verify_theorem(2, 6)
print(report.text())
print(f"{time.perf_counter() - start:.1f}s")

print()
print(verify_lemma(2, 6, oracle_sample=0).text())
