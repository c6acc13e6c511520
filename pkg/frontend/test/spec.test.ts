import { describe, expect, it } from "vitest";

import { parsePairs, parseSpec, SpecError } from "../src/spec";

const BASE = "/tmp";

const MINIMAL = `
output = out.svg
columns = E
input.0.path = a.csv
input.0.label = EMAC
`;

describe("plotspec grammar", () => {
  it("parses key-value pairs with comments", () => {
    const pairs = parsePairs("# c\n a = 1 \n\nb = two # t\n");
    expect(pairs.get("a")).toBe("1");
    expect(pairs.get("b")).toBe("two");
  });

  it("rejects duplicates and malformed lines", () => {
    expect(() => parsePairs("a = 1\na = 2\n")).toThrow(SpecError);
    expect(() => parsePairs("nonsense\n")).toThrow(/line 1/);
  });

  it("fills defaults", () => {
    const spec = parseSpec(MINIMAL, BASE);
    expect(spec.xcolumn).toBe("t");
    expect(spec.yscale).toBe("linear");
    expect(spec.width).toBe(800);
    expect(spec.inputs).toHaveLength(1);
    expect(spec.output).toBe("/tmp/out.svg");
  });

  it("requires columns and inputs", () => {
    expect(() => parseSpec("output = o.svg\ncolumns = E\n", BASE)).toThrow(/input/);
    expect(() =>
      parseSpec("output = o.svg\ninput.0.path = a.csv\n", BASE),
    ).toThrow(/columns/);
  });

  it("validates yscale and ylim", () => {
    expect(() => parseSpec(MINIMAL + "yscale = cubic\n", BASE)).toThrow(/yscale/);
    expect(() => parseSpec(MINIMAL + "ylim = 3,1\n", BASE)).toThrow(/ylim/);
    const spec = parseSpec(MINIMAL + "ylim = 4.75,5.25\nyscale = log\n", BASE);
    expect(spec.ylim).toEqual([4.75, 5.25]);
    expect(spec.yscale).toBe("log");
  });

  it("rejects unknown keys", () => {
    expect(() => parseSpec(MINIMAL + "zoom = yes\n", BASE)).toThrow(/unknown keys: zoom/);
  });
});
