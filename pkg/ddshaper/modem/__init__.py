from ddshaper.modem.chain import matched_filter_receive, shape_transmit
from ddshaper.modem.channel import apply_paths, Path, PathSet
from ddshaper.modem.frame import DDSymbolFrame, qpsk_decide, qpsk_frame
from ddshaper.modem.io import read_frame_csv, read_paths_csv, read_waveform, write_frame_csv, write_waveform
from ddshaper.modem.metrics import evm_ser_report, LinkReport
