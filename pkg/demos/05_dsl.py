"""
The circuit text format
=======================
"""

from refform import DSLError, corpus, emit, parse

text = """
circuit gate {
  input D;
  control en;
  clock c free;
  # hold the old value unless enabled
  ff Q clock c select en { {Q}, {D} };
  output from {Q};
}
"""
c = parse(text)
print(emit(c))
print(parse(emit(c)) == c)

# diagnostics carry line and column
try:
    parse("circuit x {\n  input I;\n  output from {G};\n}")
except DSLError as err:
    print(err)

for name in corpus.names():
    print(name, len(corpus.source(name).splitlines()), "lines")
