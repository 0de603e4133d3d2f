/* tslint:disable */
/* eslint-disable */

/**
 * Full analysis report for a configuration, bare or wrapped in a fixture.
 */
export function analyze_configuration(src: string): string;

/**
 * `P`, `Q` and `Δ` at a comma or space separated list of rationals.
 */
export function evaluate_continuant(values: string): string;

/**
 * Bundled configurations and germs, as `[{name, kind, payload}]`.
 */
export function examples(): string;

/**
 * Reduction report for a germ; `q = 0` reduces by the germ's own index.
 */
export function reduce_germ(src: string, q: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly analyze_configuration: (a: number, b: number) => [number, number, number, number];
    readonly evaluate_continuant: (a: number, b: number) => [number, number, number, number];
    readonly examples: () => [number, number];
    readonly reduce_germ: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
