/**
 * Wire types for the canonical document JSON exchanged with the annotation
 * service, plus the view model the renderer consumes.
 *
 * All character offsets in the wire format are Unicode code points, not
 * UTF-16 units; the renderer converts before slicing strings.
 */
export {};
//# sourceMappingURL=types.js.map