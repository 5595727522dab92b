import { describe, expect, it } from "vitest";

import type { ProfilePayload, SeriesPoint } from "../src/api.js";
import {
    buildProfileFacet,
    buildProfileGrid,
    facetYDomain,
    gridColumns,
    replacedCount,
} from "../src/charts.js";

function point(year: number, wage: string, replaced = false, fitted = "5.0"): SeriesPoint {
    return {
        year,
        wage,
        fitted,
        weight: replaced ? 0.01 : 0.95,
        replaced,
        final: replaced ? fitted : wage,
    };
}

function profile(id: number, series: SeriesPoint[]): ProfilePayload {
    return {
        id,
        threshold: 0.1,
        eligible: true,
        skipped_reason: null,
        converged: true,
        series,
    };
}

describe("gridColumns", () => {
    it("lays 36 profiles out as a 6x6 grid", () => {
        expect(gridColumns(36)).toBe(6);
    });

    it("stays square-ish elsewhere", () => {
        expect(gridColumns(1)).toBe(1);
        expect(gridColumns(5)).toBe(3);
        expect(gridColumns(16)).toBe(4);
        expect(gridColumns(48)).toBe(7);
    });
});

describe("facetYDomain", () => {
    it("is free per facet: each profile scales to its own range", () => {
        const low = facetYDomain(profile(1, [point(1979, "2.0"), point(1980, "4.0")]));
        const high = facetYDomain(profile(2, [point(1979, "100.0"), point(1980, "900.0")]));
        expect(low.hi).toBeLessThan(high.lo);
        expect(low.loLabel).toBe("2.0");
        expect(high.hiLabel).toBe("900.0");
    });

    it("covers the repaired values too", () => {
        const domain = facetYDomain(
            profile(1, [point(1979, "5.0"), point(1980, "1200.0", true, "5.2")]),
        );
        expect(domain.hi).toBe(1200.0);
        expect(domain.lo).toBe(5.0);
    });
});

describe("buildProfileFacet", () => {
    it("marks replaced points distinctly and reports the count", () => {
        const p = profile(7, [
            point(1979, "5.0"),
            point(1980, "1200.0", true, "5.2"),
            point(1981, "5.4"),
        ]);
        expect(replacedCount(p)).toBe(1);
        const svg = buildProfileFacet(p);
        expect(svg).toContain('data-id="7"');
        expect(svg).toContain('data-replaced="1"');
        expect(svg.match(/class="dot replaced"/g)).toHaveLength(1);
        expect(svg.match(/class="dot"/g)).toHaveLength(2);
        expect(svg).toContain("repaired-line");
    });

    it("labels ineligible profiles", () => {
        const p = {
            ...profile(3, [point(1979, "5.0"), point(1980, "5.1")]),
            eligible: false,
            converged: null,
        };
        expect(buildProfileFacet(p)).toContain("not repaired");
    });
});

describe("buildProfileGrid", () => {
    it("renders an empty state for no payloads", () => {
        expect(buildProfileGrid([])).toContain("empty-state");
    });

    it("renders one facet per profile with the grid width set", () => {
        const profiles = Array.from({ length: 36 }, (_, i) =>
            profile(i + 1, [point(1979, "5.0"), point(1980, "6.0")]),
        );
        const html = buildProfileGrid(profiles);
        expect(html).toContain("repeat(6, 1fr)");
        expect(html.match(/<svg/g)).toHaveLength(36);
    });
});
