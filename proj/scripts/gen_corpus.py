#!/usr/bin/env python3
"""Writes the example circuits under corpus/.

The files are checked in; rerun this after changing a generator.
"""
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "corpus"
BREAK = "//@break\nbarrier {regs};"


def write(name, text):
    (OUT / name).write_text(text.lstrip("\n"))


def qft3():
    return f"""
OPENQASM 2.0;
// 3-qubit quantum Fourier transform, one slice per algorithmic step.
qreg q[3];
//@context qft3
h q[2];
cp(pi/2) q[1],q[2];
cp(pi/4) q[0],q[2];
{BREAK.format(regs="q")}
h q[1];
cp(pi/2) q[0],q[1];
{BREAK.format(regs="q")}
h q[0];
{BREAK.format(regs="q")}
swap q[0],q[2];
"""


def full_adder():
    return f"""
OPENQASM 2.0;
// One-bit full adder: cout = maj(a, b, cin), cin <- a xor b xor cin.
qreg a[1];
qreg b[1];
qreg cin[1];
qreg cout[1];
creg sum[1];
creg carry[1];
//@context inputs
x a[0];
x cin[0];
{BREAK.format(regs="a,b,cin,cout")}
//@context carry
ccx a[0],b[0],cout[0];
ccx a[0],cin[0],cout[0];
ccx b[0],cin[0],cout[0];
{BREAK.format(regs="a,b,cin,cout")}
//@context sum
cx a[0],cin[0];
cx b[0],cin[0];
{BREAK.format(regs="a,b,cin,cout")}
//@context readout
measure cin[0] -> sum[0];
measure cout[0] -> carry[0];
"""


def simon():
    return f"""
OPENQASM 2.0;
// Simon's algorithm, secret string 011 (f(x) = f(x xor 011)).
qreg x[3];
qreg y[3];
creg c[3];
//@context simon
h x;
{BREAK.format(regs="x,y")}
//@context oracle
cx x[0],y[0];
cx x[1],y[1];
cx x[2],y[2];
cx x[0],y[0];
cx x[0],y[1];
{BREAK.format(regs="x,y")}
//@context simon
h x;
measure x -> c;
"""


def triangle_oracle(lines):
    # Graph edges (0,1), (0,2), (1,2), (2,3); the only triangle is {0,1,2}.
    # f(nodes) = 1 iff the selected nodes are exactly {0,1,2}; f is XORed into
    # every flag qubit and all ancillas are returned to |0>.
    compute = [
        "ccx nodes[0],nodes[1],anc[0];",
        "ccx nodes[0],nodes[2],anc[1];",
        "ccx nodes[1],nodes[2],anc[2];",
        "ccx nodes[2],nodes[3],anc[3];",
        "//@ext mcx",
        "mcx anc[0],anc[1],anc[2],anc[4];",
        "//@ext mcx",
        "mcx nodes[0],nodes[1],nodes[2],nodes[3],anc[5];",
    ]
    lines.append("//@context triangle_oracle")
    lines.extend(compute)
    lines.append("x anc[5];")
    for k in range(3):
        lines.append(f"ccx anc[4],anc[5],check_qubits[{k}];")
    lines.append("x anc[5];")
    uncompute = [l for l in compute if not l.startswith("//")][::-1]
    for l in uncompute:
        if l.startswith("mcx"):
            lines.append("//@ext mcx")
        lines.append(l)


def diffusion(lines, buggy):
    lines.append("//@context grover_diff")
    lines += ["h nodes;", "x nodes;", "h nodes[3];", "//@ext mcx",
              "mcx nodes[0],nodes[1],nodes[2],nodes[3];", "h nodes[3];", "x nodes;"]
    if buggy:
        lines.append("x nodes[0];")
    lines.append("h nodes;")


GROVER_REGS = ["qreg nodes[4];", "qreg anc[6];", "qreg check_qubits[3];"]
GROVER_ALL = "nodes,anc,check_qubits"


def grover_full(buggy):
    iters = math.floor(math.pi / 4 * math.sqrt(16 / 1))
    lines = ["OPENQASM 2.0;",
             "// Grover search for the triangle {0,1,2} in the 4-node graph with",
             "// edges (0,1) (0,2) (1,2) (2,3). Marked node pattern: 0111.",
             *GROVER_REGS, "creg class_reg[4];",
             "//@context state_prep", "x check_qubits;", "h check_qubits;", "h nodes;"]
    for i in range(iters):
        lines.append(BREAK.format(regs=GROVER_ALL))
        triangle_oracle(lines)
        diffusion(lines, buggy)
    lines.append("//@context readout")
    lines.append("measure nodes -> class_reg;")
    return "\n".join(lines) + "\n"


def grover_debug(buggy):
    lines = ["OPENQASM 2.0;",
             "// One Grover iteration of triangle finding, cut into state_prep,",
             "// oracle and diffusion slices.",
             *GROVER_REGS,
             "//@context state_prep", "h nodes;", BREAK.format(regs=GROVER_ALL)]
    triangle_oracle(lines)
    lines.append(BREAK.format(regs=GROVER_ALL))
    diffusion(lines, buggy)
    return "\n".join(lines) + "\n"


def diffusion_file(buggy):
    # Line numbers matter: gate_loc reports them.
    body = [
        "OPENQASM 2.0; qreg nodes[4]; //@context grover_diff",
        "h nodes;",
        "x nodes;",
        "// multi-controlled Z on the node register",
        "h nodes[3]; mcx nodes[0],nodes[1],nodes[2],nodes[3]; h nodes[3]; //@ext mcx",
        "x nodes;",
        "x nodes[0];" if buggy else "// (no extra gate here)",
        "h nodes;",
    ]
    return "\n".join(body) + "\n"


def quantum_counting():
    lines = ["OPENQASM 2.0;",
             "// Quantum counting: phase estimation of the Grover iterate for the",
             "// single marked item 0111 with 4 counting qubits.",
             "qreg count[4];", "qreg search[4];", "creg est[4];",
             "//@context state_prep", "h count;", "h search;"]

    def controlled_grover(c):
        lines.append("//@context oracle")
        lines.extend(["x search[3];", "h search[3];", "//@ext mcx",
                      f"mcx count[{c}],search[0],search[1],search[2],search[3];",
                      "h search[3];", "x search[3];"])
        lines.append("//@context diffusion")
        lines.extend(["h search;", "x search;", "h search[3];", "//@ext mcx",
                      f"mcx count[{c}],search[0],search[1],search[2],search[3];",
                      "h search[3];", "x search;", "h search;"])

    for j in range(4):
        lines.append(BREAK.format(regs="count,search"))
        for _ in range(2 ** j):
            controlled_grover(j)
    lines.append(BREAK.format(regs="count,search"))
    lines.append("//@context inverse_qft")
    lines += ["swap count[0],count[3];", "swap count[1],count[2];"]
    for j in range(4):
        for k in range(j):
            lines.append(f"cp(-pi/{2 ** (j - k)}) count[{k}],count[{j}];")
        lines.append(f"h count[{j}];")
    lines.append("measure count -> est;")
    return "\n".join(lines) + "\n"


def main():
    OUT.mkdir(exist_ok=True)
    write("qft3.qasm", qft3())
    write("full_adder.qasm", full_adder())
    write("simon2.qasm", simon())
    write("grover_triangle.qasm", grover_full(False))
    write("grover_triangle_buggy.qasm", grover_full(True))
    write("grover_triangle_debug.qasm", grover_debug(False))
    write("grover_triangle_debug_buggy.qasm", grover_debug(True))
    write("diffusion.qasm", diffusion_file(False))
    write("diffusion_buggy.qasm", diffusion_file(True))
    write("quantum_counting8.qasm", quantum_counting())


if __name__ == "__main__":
    main()
