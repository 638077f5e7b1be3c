"""Native code generation for x86-64."""
from .emit import NativeArtifact, emit_native, function_label, relocate
from .frames import FrameContext, layout_frames
from .link import link, unpatched_sites
from .sends import (InlinedTemplate, InternalCall, PrimitiveTemplate, TEMPLATES, VmFunctionCall,
                    classify_send, inline_template, template_for)
from .x86 import ABS64, REL32, Assembler, Relocation


def nativize(f, symbols, callees=()):
    """SSA function (plus callees) to a relocated artifact."""
    return emit_native(f, layout_frames(f), symbols,
                       [(g, layout_frames(g)) for g in callees])


__all__ = ["ABS64", "REL32", "Assembler", "FrameContext", "InlinedTemplate", "InternalCall",
           "NativeArtifact", "PrimitiveTemplate", "Relocation", "TEMPLATES", "VmFunctionCall",
           "classify_send", "emit_native", "function_label", "inline_template", "layout_frames",
           "link", "nativize", "relocate", "template_for", "unpatched_sites"]
