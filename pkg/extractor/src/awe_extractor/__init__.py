"""Corpus extraction adapter for the layered-representation toolkit.

Turns audio + transcripts + forced-aligner output into the container
formats the analysis package reads: layered speech tensors, lexical
token tensors, Mel streams, alignment files, and a manifest.
"""

from .audio import load_wav, resample_to_16k
from .encoders import SpeechEncoder, TextEncoder
from .job import ExtractionJob, UtteranceSpec, read_transcript_table, run_extraction
from .mel import frame_count, log_mel_spectrogram
from .textgrid import ParsedWord, TextGridError, parse_alignments

__version__ = "0.1.0"
