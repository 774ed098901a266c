import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

const cliPath = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
const data = (name: string) => fileURLToPath(new URL(`../testdata/${name}`, import.meta.url));

function run(args: string[]): { code: number; stderr: string } {
  try {
    execFileSync("node", [cliPath, ...args], { stdio: "pipe" });
    return { code: 0, stderr: "" };
  } catch (err) {
    const e = err as { status: number | null; stderr: Buffer };
    return { code: e.status ?? -1, stderr: e.stderr.toString() };
  }
}

describe("rmtq-figs CLI", () => {
  const tmp = mkdtempSync(join(tmpdir(), "figs-"));

  it("renders all three figure kinds from golden CSVs", () => {
    const cases: Array<[string, string, string[]]> = [
      ["hist_overlay", "annealed_gap.csv", ["--ref", data("gap_reference_beta2.csv")]],
      ["hist_grid", "monoparametric_quenched.csv", ["--ref", data("gap_reference_beta2.csv")]],
      ["ks_loglog", "ks_convergence.csv", []],
    ];
    for (const [kind, input, extra] of cases) {
      const out = join(tmp, `${kind}.svg`);
      const { code } = run(["render", "--kind", kind, "--input", data(input), "--out", out, ...extra]);
      expect(code, kind).toBe(0);
      expect(existsSync(out)).toBe(true);
      expect(readFileSync(out, "utf-8")).toMatch(/^<svg/);
    }
  });

  it("fails nonzero on schema mismatch with a column diff", () => {
    const out = join(tmp, "bad.svg");
    const { code, stderr } = run([
      "render", "--kind", "hist_overlay",
      "--input", data("ks_convergence.csv"),
      "--ref", data("gap_reference_beta2.csv"),
      "--out", out,
    ]);
    expect(code).toBe(1);
    expect(stderr).toMatch(/SchemaError/);
    expect(stderr).toMatch(/missing/);
    expect(existsSync(out)).toBe(false);
  });

  it("fails nonzero on an empty CSV", () => {
    const empty = join(tmp, "empty.csv");
    writeFileSync(empty, "experiment,arm,N,repetition,ks,samples\n");
    const { code, stderr } = run(["render", "--kind", "ks_loglog", "--input", empty, "--out", join(tmp, "e.svg")]);
    expect(code).toBe(1);
    expect(stderr).toMatch(/no data rows/);
  });

  it("fails with usage error on unknown kind", () => {
    const { code } = run(["render", "--kind", "pie", "--input", data("ks_convergence.csv"), "--out", join(tmp, "p.svg")]);
    expect(code).toBe(2);
  });

  it("renders deterministically", () => {
    const out1 = join(tmp, "d1.svg");
    const out2 = join(tmp, "d2.svg");
    for (const out of [out1, out2]) {
      run(["render", "--kind", "ks_loglog", "--input", data("ks_convergence.csv"), "--out", out]);
    }
    expect(readFileSync(out1, "utf-8")).toBe(readFileSync(out2, "utf-8"));
  });
});
