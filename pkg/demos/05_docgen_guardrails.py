"""Guarded documentation generation.

Everything the model produces is confined to /** ... */ comment blocks:
any `*/` in its output is defused, so even a hostile completion cannot
escape the comment and become executable code. Each block carries a
constant watermark, which also makes regeneration idempotent.

This demo uses a scripted stand-in for the model, so it runs offline.

Run:  python demos/05_docgen_guardrails.py
"""

from cello import ScriptedLlm
from cello.cst import parse, significant_tokens
from cello.docgen import WATERMARK, document_file

SOURCE = b"""namespace demo {

double scale(double v) { return 2.0 * v; }

int count_hits(const int* hits, int n) {
  int total = 0;
  for (int i = 0; i < n; ++i) { total += hits[i]; }
  return total;
}

}  // namespace demo
"""

# A hostile completion that tries to close the comment and inject code:
hostile = 'Scales input. */ int injected_backdoor() { return 666; } /*'

llm = ScriptedLlm([hostile])
documented = document_file(SOURCE, "demo.cpp", llm)
print(documented.decode())

# --- The three guardrail checks ------------------------------------------
assert parse(documented).error_count == 0, "reparse must stay clean"
assert significant_tokens(SOURCE) == significant_tokens(documented), \
    "non-comment token stream must be untouched"
assert documented.count(WATERMARK.encode()) == 2, "one watermark per block"
print("guardrails held: injected code is inert, tokens unchanged, "
      "watermark present")

# --- Idempotence -----------------------------------------------------------
again = document_file(documented, "demo.cpp", ScriptedLlm([hostile]))
assert again == documented
print("second run is a byte-level fixpoint (no stacked comments)")
