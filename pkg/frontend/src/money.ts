// Money display straight from the API's decimal strings. The digits are
// never routed through a float, so what the server sent is what the
// user sees (floats are used only for chart geometry, never for text).

export function formatMoney(decimal: string | null): string {
    if (decimal === null) {
        return "—";
    }
    if (decimal.includes("e") || decimal.includes("E")) {
        // Scientific notation never happens for wage magnitudes; show raw
        // rather than reformat through a float.
        return `$${decimal}`;
    }
    let sign = "";
    let digits = decimal;
    if (digits.startsWith("-")) {
        sign = "-";
        digits = digits.slice(1);
    }
    const dot = digits.indexOf(".");
    const whole = dot === -1 ? digits : digits.slice(0, dot);
    const cents = (dot === -1 ? "" : digits.slice(dot + 1)).slice(0, 2).padEnd(2, "0");
    return `${sign}$${whole || "0"}.${cents}`;
}
