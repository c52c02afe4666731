import pytest

from src.utils.task_processor import TaskProcessor


class Task:
    def __init__(self, label, value):
        self.label = label
        self.value = value


def double(task):
    return [task.value * 2]


def explode(task):
    raise RuntimeError(f"cannot handle {task.label}")


@pytest.fixture
def processor():
    return TaskProcessor({'double': double, 'explode': explode})


def test_handlers_keep_registration_order(processor):
    assert processor.get_registered_handlers() == ['double', 'explode']
    processor.register_handler('triple', lambda task: [task.value * 3])
    assert processor.get_registered_handlers()[-1] == 'triple'


def test_process_task(processor):
    assert processor.process_task('double', Task('a', 2)) == [4]


def test_failed_task_becomes_error_result(processor):
    result = processor.process_task('explode', Task('a', 1))
    assert result == [{'task': 'explode', 'label': 'a', 'status': 'error', 'message': 'cannot handle a'}]


def test_unknown_handler(processor):
    result = processor.process_task('missing', Task('a', 1))
    assert result[0]['status'] == 'error'


def test_error_factory():
    processor = TaskProcessor({'explode': explode}, error_factory=lambda name, label, message: (name, label))
    assert processor.process_task('explode', Task('b', 0)) == [('explode', 'b')]


@pytest.mark.parametrize('jobs', [1, 3])
def test_process_tasks_preserves_order(processor, jobs):
    tasks = [('double', Task(str(i), i)) for i in range(6)] + [('explode', Task('x', 0))]
    results = processor.process_tasks(tasks, jobs=jobs)
    assert results[:6] == [[2 * i] for i in range(6)]
    assert results[6][0]['status'] == 'error'
    assert processor.summary == {'total_tasks': 7, 'successful_tasks': 6, 'failed_tasks': 1}


def test_invalid_jobs(processor):
    with pytest.raises(ValueError):
        processor.process_tasks([], jobs=0)
