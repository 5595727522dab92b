// Small-multiple profile charts as SVG strings: original wages as black
// dots, the repaired series as a solid grey line, replaced points
// ringed in red. Pure string building so the geometry is unit-testable
// without a DOM. Floats are parsed here for coordinates only; all
// visible numbers come from the payload's decimal strings.

import type { ProfilePayload, SeriesPoint } from "./api.js";
import { formatMoney } from "./money.js";

export const FACET_WIDTH = 190;
export const FACET_HEIGHT = 120;
const PAD = { top: 18, right: 8, bottom: 16, left: 8 };

export function gridColumns(count: number): number {
    if (count <= 1) {
        return 1;
    }
    return Math.ceil(Math.sqrt(count));
}

interface Scale {
    min: number;
    max: number;
    to(value: number): number;
}

function makeScale(values: number[], outLo: number, outHi: number): Scale {
    let min = Math.min(...values);
    let max = Math.max(...values);
    if (min === max) {
        min -= 1;
        max += 1;
    }
    const span = max - min;
    return {
        min,
        max,
        to: (value: number) => outLo + ((value - min) / span) * (outHi - outLo),
    };
}

function pointValue(point: SeriesPoint): number | null {
    return point.wage === null ? null : Number(point.wage);
}

function finalValue(point: SeriesPoint): number | null {
    return point.final === null ? null : Number(point.final);
}

export interface YDomain {
    lo: number;
    hi: number;
    loLabel: string;   // the served decimal string at the extremes
    hiLabel: string;
}

export function facetYDomain(profile: ProfilePayload): YDomain {
    // Free y scale per facet: each person's own wages set the range.
    // The labels reuse the served decimal strings of the extreme points.
    const pairs: Array<[number, string]> = [];
    for (const point of profile.series) {
        if (point.wage !== null) {
            pairs.push([Number(point.wage), point.wage]);
        }
        if (point.final !== null) {
            pairs.push([Number(point.final), point.final]);
        }
    }
    if (pairs.length === 0) {
        return { lo: 0, hi: 1, loLabel: "0", hiLabel: "1" };
    }
    let lo = pairs[0];
    let hi = pairs[0];
    for (const pair of pairs) {
        if (pair[0] < lo[0]) {
            lo = pair;
        }
        if (pair[0] > hi[0]) {
            hi = pair;
        }
    }
    return { lo: lo[0], hi: hi[0], loLabel: lo[1], hiLabel: hi[1] };
}

export function replacedCount(profile: ProfilePayload): number {
    return profile.series.filter((point) => point.replaced).length;
}

export function buildProfileFacet(profile: ProfilePayload): string {
    const innerW: [number, number] = [PAD.left, FACET_WIDTH - PAD.right];
    const innerH: [number, number] = [FACET_HEIGHT - PAD.bottom, PAD.top];
    const years = profile.series.map((point) => point.year);
    const domain = facetYDomain(profile);
    const x = makeScale(years, innerW[0], innerW[1]);
    const y = makeScale([domain.lo, domain.hi], innerH[0], innerH[1]);

    const parts: string[] = [];
    parts.push(
        `<svg class="facet" viewBox="0 0 ${FACET_WIDTH} ${FACET_HEIGHT}"` +
            ` data-id="${profile.id}" data-replaced="${replacedCount(profile)}">`,
    );
    parts.push(
        `<text class="facet-title" x="${PAD.left}" y="12">id ${profile.id}` +
            (profile.eligible ? "" : " (not repaired)") +
            `</text>`,
    );

    // Repaired series line (the overlay the threshold controls).
    const lineCoords: string[] = [];
    for (const point of profile.series) {
        const final = finalValue(point);
        if (final !== null) {
            lineCoords.push(`${x.to(point.year).toFixed(1)},${y.to(final).toFixed(1)}`);
        }
    }
    if (lineCoords.length > 1) {
        parts.push(
            `<polyline class="repaired-line" fill="none" points="${lineCoords.join(" ")}"/>`,
        );
    }

    // Original observations, replaced ones ringed.
    for (const point of profile.series) {
        const wage = pointValue(point);
        if (wage === null) {
            continue;
        }
        const cx = x.to(point.year).toFixed(1);
        const cy = y.to(wage).toFixed(1);
        const title =
            `year ${point.year}: ${formatMoney(point.wage)}` +
            (point.replaced ? ` -> ${formatMoney(point.fitted)}` : "");
        if (point.replaced) {
            parts.push(
                `<circle class="dot replaced" cx="${cx}" cy="${cy}" r="3.5">` +
                    `<title>${title}</title></circle>`,
            );
        } else {
            parts.push(
                `<circle class="dot" cx="${cx}" cy="${cy}" r="2.2">` +
                    `<title>${title}</title></circle>`,
            );
        }
    }

    parts.push(
        `<text class="facet-range" x="${PAD.left}" y="${FACET_HEIGHT - 4}">` +
            `${formatMoney(domain.loLabel)} – ${formatMoney(domain.hiLabel)}</text>`,
    );
    parts.push("</svg>");
    return parts.join("");
}

export function buildProfileGrid(profiles: ProfilePayload[]): string {
    if (profiles.length === 0) {
        return `<p class="empty-state">No profiles to show. Draw a sample.</p>`;
    }
    const columns = gridColumns(profiles.length);
    const facets = profiles.map((profile) => buildProfileFacet(profile)).join("");
    return `<div class="grid" style="grid-template-columns: repeat(${columns}, 1fr)">${facets}</div>`;
}
