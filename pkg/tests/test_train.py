import pytest
import torch

from protoabstract.dataset.align import align_all
from protoabstract.errors import ConfigError, Divergence, EmptyBatch
from protoabstract.model import EncoderConfig, JointModel
from protoabstract.train import (
    TrainConfig,
    MetricRecord,
    build_optimizer,
    collate,
    error_distribution,
    evaluate,
    param_groups,
    read_history_csv,
    train,
    write_history_csv,
)


@pytest.fixture(scope="module")
def aligned(synth_small):
    corpus, _, tok = synth_small
    data, dropped = align_all(corpus, tok)
    assert dropped == 0
    return data[:48], data[48:], EncoderConfig.tiny(tok.get_vocab_size())


@pytest.mark.parametrize("field,value", [("epochs", 0), ("learning_rate", 0.0), ("weight_decay", -1.0),
                                         ("batch_size", 0)])
def test_config_rejects_bad_values(field, value):
    with pytest.raises(ConfigError):
        TrainConfig(**{field: value})
    with pytest.raises(ConfigError):
        TrainConfig(epochs_by_variant={"joint1": 0})


def test_epochs_by_variant():
    cfg = TrainConfig(epochs_by_variant={"joint1": 40})
    assert cfg.epochs_for("joint1") == 40 and cfg.epochs_for("joint2") == 20
    assert TrainConfig.tiny().learning_rate == 1e-3 and TrainConfig.tiny(learning_rate=5e-4).learning_rate == 5e-4


def test_weight_decay_groups():
    torch.manual_seed(0)
    model = JointModel(EncoderConfig.tiny(50), "joint2")
    groups = param_groups(model, TrainConfig())
    decay, no_decay = groups
    assert decay["weight_decay"] == 0.1 and no_decay["weight_decay"] == 0.0
    assert all("bias" in n for n in no_decay["names"])
    assert "idf_head.fc1.weight" in decay["names"] and "idf_head.fc1.bias" in no_decay["names"]
    named = dict(model.named_parameters())
    assert len(decay["names"]) + len(no_decay["names"]) == len(named)


def test_custom_exemption_names_reach_optimizer():
    torch.manual_seed(0)
    model = JointModel(EncoderConfig.tiny(50), "joint2")
    opt = build_optimizer(model, TrainConfig(no_regularization_names=("bias", "LayerNorm")))
    by_param = {id(p): g["weight_decay"] for g in opt.param_groups for p in g["params"]}
    for name, p in model.named_parameters():
        assert by_param[id(p)] == (0.0 if ("bias" in name or "LayerNorm" in name) else 0.1)


def test_metric_record_bounds():
    with pytest.raises(ValueError):
        MetricRecord(1, 1.2, 0.5, 0.5, 0.5, 1.0, 1.0)


def test_collate_pads_with_ignore(aligned):
    train_set, _, _ = aligned
    b = collate(train_set[:3])
    width = max(len(ex) for ex in train_set[:3])
    assert b["input_ids"].shape == (3, width)
    short = min(range(3), key=lambda i: len(train_set[i]))
    n = len(train_set[short])
    if n < width:
        assert (b["identifier_labels"][short, n:] == -100).all()
        assert (b["attention_mask"][short, n:] == 0).all()


def test_training_is_deterministic(aligned, tmp_path):
    train_set, valid_set, enc = aligned
    cfg = TrainConfig.tiny(epochs=2, seed=5)
    m1, h1 = train("joint2", train_set, valid_set, cfg, enc)
    m2, h2 = train("joint2", train_set, valid_set, cfg, enc)
    assert h1 == h2
    for (k, a), (_, b) in zip(m1.state_dict().items(), m2.state_dict().items()):
        assert torch.equal(a, b), k
    assert [r.epoch for r in h1] == [1, 2]
    write_history_csv(h1, tmp_path / "m.csv")
    assert read_history_csv(tmp_path / "m.csv") == h1


def test_plateau_errors_are_missed_identifiers(aligned):
    train_set, valid_set, enc = aligned
    model, _ = train("joint2", train_set, valid_set, TrainConfig.tiny(epochs=5), enc)
    errors = error_distribution(model, train_set + valid_set).errors("identifier")
    missed = errors.get((1, 0), 0) + errors.get((2, 0), 0)
    assert missed >= 0.9 * sum(errors.values())


def test_evaluate_matches_metric_functions(aligned):
    from protoabstract.metrics import acc_fprop, acc_idf
    from protoabstract.model import predict

    train_set, valid_set, enc = aligned
    torch.manual_seed(0)
    model = JointModel(enc, "joint1").eval()
    got = evaluate(model, valid_set, TrainConfig(batch_size=len(valid_set)))
    b = collate(valid_set)
    with torch.no_grad():
        idf_pred, fp_pred = predict(*model(b["input_ids"], b["attention_mask"]))
    assert got["idf"] == pytest.approx(acc_idf(idf_pred, b["identifier_labels"]))
    assert got["fprop"] == pytest.approx(acc_fprop(fp_pred, b["fp_labels"]))


def test_divergence_is_reported(aligned):
    train_set, valid_set, enc = aligned
    with pytest.raises(Divergence):
        train("joint2", train_set, valid_set, TrainConfig(epochs=1, learning_rate=1e30), enc)


def test_empty_splits_rejected(aligned):
    train_set, _, enc = aligned
    with pytest.raises(EmptyBatch):
        train("joint2", train_set, [], TrainConfig(epochs=1), enc)
